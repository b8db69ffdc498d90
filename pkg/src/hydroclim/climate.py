"""Köppen-Geiger lookup, continental-scale region assignment and the
minimum-station representativeness filter.

The climate grid is consumed as a CSV of (lat, lon, class) cell centers on a
regular grid (default 0.5 degrees).  Region geometries are named sets of
latitude/longitude boxes per variable kind, loaded from a YAML file; the
shipped defaults approximate hand-drawn continental groups and are meant to
be replaced by users who need fidelity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import yaml

from .errors import DataError, FormatError
from .ingest import VARIABLE_KINDS

MIN_GROUP_SIZE = 30

ZONES = "ABCDE"

# Valid Köppen-Geiger codes per the standard alphabet: zone letter, then
# precipitation letter, then (optionally) temperature letter.
_SECOND = {"A": "fmws", "B": "WS", "C": "fsw", "D": "fsw", "E": "TF"}
_THIRD = {"B": "hk", "C": "abc", "D": "abcd"}


def is_valid_class_code(code: str) -> bool:
    if not isinstance(code, str) or not 2 <= len(code) <= 3:
        return False
    zone = code[0]
    if zone not in ZONES or code[1] not in _SECOND[zone]:
        return False
    if len(code) == 2:
        return True
    return zone in _THIRD and code[2] in _THIRD[zone]


@dataclass(frozen=True)
class ClimateLabel:
    """A 2-4 letter class code and its main climate zone (first letter)."""

    class_code: str

    def __post_init__(self):
        if not is_valid_class_code(self.class_code):
            raise DataError(f"invalid Köppen-Geiger code {self.class_code!r}")

    @property
    def zone(self) -> str:
        return self.class_code[0]


@dataclass
class ClimateGrid:
    """Regular grid of class codes keyed by integer cell indices."""

    resolution: float = 0.5
    cells: dict[tuple[int, int], str] = field(default_factory=dict)

    def cell_index(self, lat: float, lon: float) -> tuple[int, int]:
        """Indices of the cell whose center is nearest to the point."""
        return (math.floor(lat / self.resolution),
                math.floor(lon / self.resolution))

    def center(self, idx: tuple[int, int]) -> tuple[float, float]:
        return ((idx[0] + 0.5) * self.resolution,
                (idx[1] + 0.5) * self.resolution)


def load_climate_grid(path, resolution: float = 0.5) -> ClimateGrid:
    """Load a (lat, lon, class) CSV of grid-cell centers.

    Coordinates off the regular grid raise FormatError, unknown class codes
    and duplicate conflicting cells raise DataError.
    """
    grid = ClimateGrid(resolution=resolution)
    half = resolution / 2.0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["lat", "lon", "class"]:
            raise FormatError(f"{path}: expected header lat,lon,class")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                lat, lon = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise FormatError(f"{path}:{lineno}: bad coordinate row {row!r}")
            code = row[2].strip()
            for coord, name in ((lat, "lat"), (lon, "lon")):
                steps = (coord - half) / resolution
                if abs(steps - round(steps)) > 1e-6:
                    raise FormatError(
                        f"{path}:{lineno}: {name} {coord} is not a center of "
                        f"the {resolution}-degree grid"
                    )
            if not is_valid_class_code(code):
                raise DataError(f"{path}:{lineno}: unknown class code {code!r}")
            idx = grid.cell_index(lat, lon)
            existing = grid.cells.get(idx)
            if existing is not None and existing != code:
                raise DataError(
                    f"{path}:{lineno}: cell {grid.center(idx)} defined twice "
                    f"with classes {existing!r} and {code!r}"
                )
            grid.cells[idx] = code
    return grid


def classify_location(grid: ClimateGrid, lat: float, lon: float,
                      search_rings: int = 1) -> ClimateLabel | None:
    """Class of the grid cell nearest to the point, or None.

    When the nearest cell is absent (ocean), occupied cells up to
    ``search_rings`` rings outward are searched and the one with the nearest
    center wins; ties resolve to the smallest cell index for determinism.
    """
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise DataError(f"coordinates ({lat}, {lon}) out of range")
    home = grid.cell_index(lat, lon)
    code = grid.cells.get(home)
    if code is not None:
        return ClimateLabel(code)
    for ring in range(1, search_rings + 1):
        candidates = []
        for di in range(-ring, ring + 1):
            for dj in range(-ring, ring + 1):
                if max(abs(di), abs(dj)) != ring:
                    continue
                idx = (home[0] + di, home[1] + dj)
                cell_code = grid.cells.get(idx)
                if cell_code is None:
                    continue
                clat, clon = grid.center(idx)
                dist = math.hypot(clat - lat, clon - lon)
                candidates.append((dist, idx, cell_code))
        if candidates:
            candidates.sort()
            return ClimateLabel(candidates[0][2])
    return None


@dataclass(frozen=True)
class RegionBox:
    south: float
    north: float
    west: float
    east: float

    def __post_init__(self):
        if not self.south < self.north:
            raise DataError(
                f"region box needs south < north, got {self.south}..{self.north}"
            )

    def contains(self, lat: float, lon: float) -> bool:
        return self.south <= lat <= self.north and self.west <= lon <= self.east


@dataclass
class RegionConfig:
    """Ordered named regions per variable kind; first declared box wins."""

    regions: dict[str, list[tuple[str, list[RegionBox]]]]

    def __post_init__(self):
        for kind, entries in self.regions.items():
            if kind not in VARIABLE_KINDS:
                raise DataError(f"unknown variable kind {kind!r} in region config")
            names = [name for name, _ in entries]
            if len(names) != len(set(names)):
                raise DataError(f"duplicate region ids for {kind}: {names}")

    def region_ids(self, variable_kind: str) -> list[str]:
        return [name for name, _ in self.regions.get(variable_kind, [])]


def load_region_config(path) -> RegionConfig:
    """Load region geometries from YAML.

    Layout::

        temperature:
          - id: T1
            boxes:
              - {south: 25, north: 72, west: -168, east: -52}
    """
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: region config must be a mapping per variable kind")
    regions = {}
    for kind, entries in raw.items():
        parsed = []
        for entry in entries or []:
            try:
                name = str(entry["id"])
                boxes = [
                    RegionBox(float(b["south"]), float(b["north"]),
                              float(b["west"]), float(b["east"]))
                    for b in entry["boxes"]
                ]
            except (KeyError, TypeError) as exc:
                raise FormatError(f"{path}: malformed region entry {entry!r}") from exc
            parsed.append((name, boxes))
        regions[kind] = parsed
    return RegionConfig(regions)


def assign_region(config: RegionConfig, variable_kind: str,
                  lat: float, lon: float) -> str | None:
    """Id of the first declared region whose any box contains the point."""
    for name, boxes in config.regions.get(variable_kind, []):
        if any(box.contains(lat, lon) for box in boxes):
            return name
    return None


def representativeness_filter(group_counts: dict, min_count: int = MIN_GROUP_SIZE):
    """Groups represented by at least ``min_count`` members (boundary inclusive)."""
    return {g for g, n in group_counts.items() if n >= min_count}
