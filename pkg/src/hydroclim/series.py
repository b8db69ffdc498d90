"""Quarterly aggregation, window selection and standardization.

Quarters are winter-first: winter of year Y averages {Dec(Y-1), Jan(Y),
Feb(Y)}, then MAM, JJA, SON.  A qualifying window spans 39 years, i.e.
exactly 156 quarters, and requires every contributing month to be present.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthError, ZeroVarianceError
from .ingest import MonthlySeries, StationRecord

WINDOW_YEARS = 39
QUARTERS_PER_YEAR = 4
SERIES_LENGTH = WINDOW_YEARS * QUARTERS_PER_YEAR  # 156


@dataclass(frozen=True)
class WindowPolicy:
    """How qualifying windows are selected.

    The default is the most recent fully complete window; the knobs exist
    because the exact historical selection criteria are not restated in one
    place.  ``max_missing_quarters`` > 0 relaxes the window *search* only; a
    window still has to aggregate cleanly (no missing quarter) to produce a
    QuarterlySeries, so the pipeline leaves it at 0.
    """

    window_years: int = WINDOW_YEARS
    max_missing_quarters: int = 0


@dataclass
class QuarterlySeries:
    """156 seasonal 3-month means for one station, winter first."""

    station: StationRecord
    first_winter_year: int  # calendar year of the first winter's January
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (SERIES_LENGTH,):
            raise LengthError(
                f"quarterly series must have exactly {SERIES_LENGTH} values, "
                f"got {self.values.shape}"
            )
        if np.isnan(self.values).any():
            raise LengthError("quarterly series must not contain missing values")


@dataclass
class StandardizedSeries:
    """Z-scored series with the original moments retained."""

    values: np.ndarray = field(repr=False)
    original_mean: float
    original_sd: float


def _window_months(series: MonthlySeries, start_year: int, window_years: int):
    """Monthly values Dec(start-1)..Nov(start+window-1) or None if out of range.

    Returns an array of length 12*window_years aligned so that consecutive
    triples are the quarters DJF, MAM, JJA, SON per year.
    """
    first_needed = (start_year - 1, 12)
    last_needed = (start_year + window_years - 1, 11)
    if first_needed < (series.first_year, 1) or last_needed > (series.last_year, 12):
        return None
    # offset of Dec(start_year-1) within the record
    offset = (start_year - 1 - series.first_year) * 12 + 11
    return series.values[offset:offset + 12 * window_years]


def aggregate_quarterly(
    series: MonthlySeries,
    window: tuple[int, int],
) -> QuarterlySeries | None:
    """Aggregate a (start_year, 39) window to 156 quarterly means.

    Returns None (not qualified) when the window leaves the record or any
    quarter has a missing month.
    """
    start_year, window_years = window
    months = _window_months(series, start_year, window_years)
    if months is None:
        return None
    quarters = months.reshape(-1, 3).mean(axis=1)
    if np.isnan(quarters).any():
        return None
    return QuarterlySeries(series.station, start_year, quarters)


def find_qualifying_window(
    series: MonthlySeries,
    policy: WindowPolicy = WindowPolicy(),
) -> tuple[int, int] | None:
    """Most recent (start_year, window_years) window with all quarters complete.

    Candidate start years are enumerated backward from the latest possible
    one; None when no candidate qualifies.
    """
    w = policy.window_years
    latest = series.last_year - w + 1
    earliest = series.first_year + 1  # winter needs December of start-1
    for start in range(latest, earliest - 1, -1):
        months = _window_months(series, start, w)
        if months is None:
            continue
        missing_quarters = int(np.isnan(months.reshape(-1, 3)).any(axis=1).sum())
        if missing_quarters <= policy.max_missing_quarters:
            return (start, w)
    return None


def standardize(series: QuarterlySeries | np.ndarray) -> StandardizedSeries:
    """Z-score with sample (n-1) mean/sd; errors on a constant series."""
    values = series.values if isinstance(series, QuarterlySeries) else np.asarray(
        series, dtype=float)
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    # Relative floor: a numerically constant series can have a tiny nonzero
    # sd purely from rounding in the mean.
    if not np.isfinite(sd) or sd <= 1e-12 * max(1.0, abs(mean)):
        raise ZeroVarianceError("cannot standardize a constant series")
    return StandardizedSeries((values - mean) / sd, mean, sd)


def first_difference(values: np.ndarray) -> np.ndarray:
    """out[t] = in[t+1] - in[t]; requires at least two points."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise LengthError("first difference needs at least 2 values")
    return np.diff(values)
