"""Pipeline configuration: one YAML file drives every stage.

All module defaults surface here, so a config that names only its inputs,
seed and output directory reproduces the declared defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .climate import MIN_GROUP_SIZE
from .decomp import StlParams
from .errors import ConfigError
from .forest import ForestParams
from .ingest import DEFAULT_MISSING_CODE, VARIABLE_KINDS
from .series import WindowPolicy


@dataclass
class PipelineConfig:
    inputs: dict[str, Path]  # variable_kind -> canonical monthly CSV
    climate_grid: Path
    region_config: Path
    output_dir: Path
    seed: int
    missing_code: str = DEFAULT_MISSING_CODE
    climate_grid_resolution: float = 0.5
    climate_search_rings: int = 1
    window: WindowPolicy = field(default_factory=WindowPolicy)
    stl: StlParams = field(default_factory=StlParams)
    spectral_smoothing: int | None = None
    forest: ForestParams = field(default_factory=ForestParams)
    mda_repeats: int = 1
    min_group_size: int = MIN_GROUP_SIZE
    histogram_bins: int = 30

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("config names no input datasets")
        for kind, path in self.inputs.items():
            if kind not in VARIABLE_KINDS:
                raise ConfigError(f"unknown variable kind {kind!r} in inputs")
            if not Path(path).is_file():
                raise ConfigError(f"input file for {kind} does not exist: {path}")
        for name, path in (("climate_grid", self.climate_grid),
                           ("region_config", self.region_config)):
            if not Path(path).is_file():
                raise ConfigError(f"{name} does not exist: {path}")
        if self.seed is None:
            raise ConfigError("config must pin a seed")


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return value


def load_config(path, seed_override: int | None = None,
                out_override=None) -> PipelineConfig:
    """Parse and validate a pipeline config file.

    Relative paths are resolved against the config file's directory.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    inputs = {k: resolve(v) for k, v in _section(raw, "inputs").items()}
    seed = raw.get("seed")
    if seed_override is not None:
        seed = seed_override
    if seed is None:
        raise ConfigError(f"{path}: config must pin a seed")
    for required in ("climate_grid", "region_config", "output_dir"):
        if required not in raw:
            raise ConfigError(f"{path}: missing required key {required!r}")

    stl_raw = _section(raw, "stl")
    forest_raw = _section(raw, "forest")
    window_raw = _section(raw, "window")
    spectral_raw = _section(raw, "spectral")

    try:
        cfg = PipelineConfig(
            inputs=inputs,
            climate_grid=resolve(raw["climate_grid"]),
            region_config=resolve(raw["region_config"]),
            output_dir=Path(out_override) if out_override is not None
            else resolve(raw["output_dir"]),
            seed=int(seed),
            missing_code=str(raw.get("missing_code", DEFAULT_MISSING_CODE)),
            climate_grid_resolution=float(raw.get("climate_grid_resolution", 0.5)),
            climate_search_rings=int(raw.get("climate_search_rings", 1)),
            window=WindowPolicy(**window_raw),
            stl=StlParams(**stl_raw),
            spectral_smoothing=spectral_raw.get("smoothing_window"),
            forest=ForestParams(**{k: v for k, v in forest_raw.items()
                                   if k != "mda_repeats"}),
            mda_repeats=int(forest_raw.get("mda_repeats", 1)),
            min_group_size=int(raw.get("min_group_size", MIN_GROUP_SIZE)),
            histogram_bins=int(raw.get("histogram_bins", 30)),
        )
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg.validate()
    return cfg
