"""Exception hierarchy shared by all hydroclim modules."""


class HydroclimError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(HydroclimError):
    """A file does not follow the expected layout (header, grid, schema)."""


class DataError(HydroclimError):
    """A file is well-formed but its content is invalid (duplicates, ranges)."""


class LengthError(HydroclimError):
    """An input sequence is too short for the requested operation."""


class ZeroVarianceError(HydroclimError):
    """A constant series where variability is required."""


class ParameterError(HydroclimError):
    """Invalid algorithm parameters (e.g. even window where odd is required)."""


class FitError(HydroclimError):
    """A local regression window holds too few points to fit."""


class ConditioningError(HydroclimError):
    """A correlation matrix is numerically singular."""


class DegenerateDecompositionError(HydroclimError):
    """A decomposition whose reference variance is zero."""


class DegenerateProblemError(HydroclimError):
    """A classification problem with fewer than two classes."""


class DependencyError(HydroclimError):
    """A pipeline stage is missing an upstream output file."""


class ConfigError(HydroclimError):
    """Pipeline configuration is invalid or references missing paths."""
