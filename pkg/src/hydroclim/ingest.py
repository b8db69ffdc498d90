"""Loading and writing of station metadata and monthly records.

The canonical on-disk format is a UTF-8 CSV with one row per station-year:

    station_id,lat,lon,year,m01,m02,...,m12

Missing months carry a configurable sentinel string (default ``-9999``).
In memory, missing values are NaN; the sentinel never survives parsing.
Upstream archives (GHCN-M and friends) are converted to this layout by
adapter scripts, keeping the core parser single and testable.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, FormatError

log = logging.getLogger(__name__)

VARIABLE_KINDS = ("temperature", "precipitation", "river_flow")

CANONICAL_HEADER = ["station_id", "lat", "lon", "year"] + [
    f"m{m:02d}" for m in range(1, 13)
]

DEFAULT_MISSING_CODE = "-9999"


@dataclass(frozen=True)
class StationRecord:
    """Identity and location of one observation station."""

    station_id: str
    latitude: float
    longitude: float
    variable_kind: str

    def __post_init__(self):
        if self.variable_kind not in VARIABLE_KINDS:
            raise DataError(
                f"unknown variable kind {self.variable_kind!r} "
                f"(expected one of {VARIABLE_KINDS})"
            )
        if not -90.0 <= self.latitude <= 90.0:
            raise DataError(
                f"station {self.station_id}: latitude {self.latitude} out of range"
            )
        if not -180.0 <= self.longitude <= 180.0:
            raise DataError(
                f"station {self.station_id}: longitude {self.longitude} out of range"
            )


@dataclass
class MonthlySeries:
    """Contiguous monthly record of one station.

    ``values`` has length 12 * n_years, January..December per year starting
    at ``first_year``.  Missing months are NaN.  Years absent from the file
    are present here as 12 NaN slots, so downstream window search sees a
    single timeline per station.
    """

    station: StationRecord
    first_year: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size % 12 != 0:
            raise DataError(
                f"station {self.station.station_id}: monthly values must be a "
                f"flat multiple of 12, got shape {self.values.shape}"
            )

    @property
    def n_years(self) -> int:
        return self.values.size // 12

    @property
    def last_year(self) -> int:
        return self.first_year + self.n_years - 1

    def month_value(self, year: int, month: int) -> float:
        """Value for calendar (year, month 1..12); NaN if outside the record."""
        if not self.first_year <= year <= self.last_year:
            return math.nan
        return float(self.values[(year - self.first_year) * 12 + month - 1])


def _parse_cell(text: str, missing_code: str) -> float:
    text = text.strip()
    if text == missing_code or text == "":
        return math.nan
    return float(text)


def load_monthly_dataset(
    path,
    variable_kind: str,
    missing_code: str = DEFAULT_MISSING_CODE,
) -> list[MonthlySeries]:
    """Load a canonical monthly CSV into one MonthlySeries per station.

    Rows with unparseable numeric cells are dropped with a warning; duplicate
    (station, year) rows and out-of-range coordinates raise ``DataError``;
    a wrong header raises ``FormatError``.
    """
    per_station: dict[str, dict] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected canonical header")
        if [h.strip() for h in header] != CANONICAL_HEADER:
            raise FormatError(
                f"{path}: bad header {header!r}, expected {CANONICAL_HEADER!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CANONICAL_HEADER):
                raise FormatError(
                    f"{path}:{lineno}: expected {len(CANONICAL_HEADER)} cells, "
                    f"got {len(row)}"
                )
            sid = row[0].strip()
            try:
                lat = float(row[1])
                lon = float(row[2])
                year = int(row[3])
                months = [_parse_cell(c, missing_code) for c in row[4:16]]
            except ValueError:
                log.warning("%s:%d: unparseable numeric cell, row dropped",
                            path, lineno)
                continue
            entry = per_station.setdefault(
                sid, {"lat": lat, "lon": lon, "years": {}}
            )
            if (entry["lat"], entry["lon"]) != (lat, lon):
                raise DataError(
                    f"{path}:{lineno}: station {sid} has inconsistent coordinates"
                )
            if year in entry["years"]:
                raise DataError(
                    f"{path}:{lineno}: duplicate year {year} for station {sid}"
                )
            entry["years"][year] = months

    dataset = []
    for sid, entry in per_station.items():
        station = StationRecord(sid, entry["lat"], entry["lon"], variable_kind)
        years = sorted(entry["years"])
        first, last = years[0], years[-1]
        values = np.full((last - first + 1) * 12, np.nan)
        for year, months in entry["years"].items():
            values[(year - first) * 12:(year - first) * 12 + 12] = months
        dataset.append(MonthlySeries(station, first, values))
    dataset.sort(key=lambda s: s.station.station_id)
    return dataset


def write_monthly_dataset(
    path,
    dataset: list[MonthlySeries],
    missing_code: str = DEFAULT_MISSING_CODE,
) -> None:
    """Write a dataset back to the canonical CSV (round-trips with the loader)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CANONICAL_HEADER)
        for series in dataset:
            st = series.station
            for yi in range(series.n_years):
                months = series.values[yi * 12:(yi + 1) * 12]
                cells = [
                    missing_code if math.isnan(v) else repr(float(v))
                    for v in months
                ]
                writer.writerow(
                    [st.station_id, repr(st.latitude), repr(st.longitude),
                     series.first_year + yi] + cells
                )
