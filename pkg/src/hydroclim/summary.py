"""Grouped statistical summaries of the feature table.

Everything here is plot-ready data, not graphics: boxplot five-number
summaries with Tukey 1.5*IQR whiskers, equal-width histograms with optional
shared axes, ranked mean tables (rank 1 = smallest, min-rank ties), group
counts and the feature correlation matrix.  Quantiles use the linear
order-statistic interpolation ("type 7") convention throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .climate import MIN_GROUP_SIZE, representativeness_filter
from .errors import HydroclimError, ParameterError
from .features import FEATURE_NAMES

GROUPINGS = ("climate_class", "climate_zone", "region", "global")

_GROUP_COLUMN = {
    "climate_class": "class_code",
    "climate_zone": "zone",
    "region": "region",
}

UNCLASSIFIED = "unclassified"


@dataclass
class BoxplotStats:
    """Five-number boxplot summary plus mean, count and outliers."""

    min_whisker: float
    q1: float
    median: float
    q3: float
    max_whisker: float
    outliers: list[float]
    n: int
    mean: float

    def to_dict(self) -> dict:
        return {
            "min_whisker": self.min_whisker,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max_whisker": self.max_whisker,
            "outliers": list(self.outliers),
            "n": self.n,
            "mean": self.mean,
        }


@dataclass
class Histogram:
    """Equal-width bins; the last bin is right-inclusive.

    Values outside a shared range are clamped into the edge bins (so the
    counts sum to every observed value) and reported separately.
    """

    edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    below_range: int = 0
    above_range: int = 0

    def to_dict(self) -> dict:
        return {
            "edges": [float(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
            "below_range": self.below_range,
            "above_range": self.above_range,
        }


@dataclass
class RankedMeanTable:
    """Per-group feature means with integer ranks along one axis.

    Rank 1 marks the smallest mean; ties share the smallest applicable rank
    (min-rank), recorded in ``tie_rule``.
    """

    groups: list[str]
    features: list[str]
    means: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)
    rank_axis: str = "per_column"
    tie_rule: str = "min"

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, g in enumerate(self.groups):
            for j, f in enumerate(self.features):
                rows.append((g, f, self.means[i, j], int(self.ranks[i, j])))
        return pd.DataFrame(rows, columns=["group", "feature", "mean", "rank"])


def boxplot_stats(values) -> BoxplotStats:
    """Tukey boxplot statistics of a non-empty sample."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise HydroclimError("boxplot statistics of an empty sample")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = x[(x < lo_fence) | (x > hi_fence)]
    return BoxplotStats(
        min_whisker=float(inside.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        max_whisker=float(inside.max()),
        outliers=sorted(float(v) for v in outliers),
        n=int(x.size),
        mean=float(x.mean()),
    )


def _group_frames(table: pd.DataFrame, grouping: str,
                  min_count: int) -> dict[str, pd.DataFrame]:
    """Eligible (group -> rows) split for one grouping.

    Rows lacking the grouping key are skipped for non-global groupings; the
    representativeness filter applies to the climate groupings only (global
    and regional summaries use all available rows).
    """
    if grouping not in GROUPINGS:
        raise ParameterError(f"unknown grouping {grouping!r}")
    if grouping == "global":
        return {"global": table}
    column = _GROUP_COLUMN[grouping]
    if column not in table.columns:
        raise ParameterError(f"feature table lacks a {column!r} column")
    labeled = table[table[column].notna() & (table[column] != UNCLASSIFIED)]
    groups = {str(g): frame for g, frame in labeled.groupby(column, sort=True)}
    if grouping in ("climate_class", "climate_zone"):
        eligible = representativeness_filter(
            {g: len(f) for g, f in groups.items()}, min_count
        )
        groups = {g: f for g, f in groups.items() if g in eligible}
    return groups


def group_summarize(table: pd.DataFrame, grouping: str,
                    min_count: int = MIN_GROUP_SIZE) -> dict:
    """BoxplotStats per (eligible group x feature)."""
    return {
        group: {f: boxplot_stats(frame[f].to_numpy()) for f in FEATURE_NAMES}
        for group, frame in _group_frames(table, grouping, min_count).items()
    }


def ranked_mean_table(table: pd.DataFrame, grouping: str,
                      rank_axis: str = "per_column",
                      min_count: int = MIN_GROUP_SIZE) -> RankedMeanTable:
    """Mean per (group, feature) with min-ranks along columns or rows."""
    if rank_axis not in ("per_column", "per_row"):
        raise ParameterError(f"rank_axis must be per_column or per_row, "
                             f"got {rank_axis!r}")
    frames = _group_frames(table, grouping, min_count)
    groups = sorted(frames)
    means = np.array([
        [float(frames[g][f].mean()) for f in FEATURE_NAMES] for g in groups
    ])
    ranks = np.zeros_like(means, dtype=int)
    axis = 0 if rank_axis == "per_column" else 1
    mat = means if axis == 0 else means.T
    out = ranks if axis == 0 else ranks.T
    for j in range(mat.shape[1]):
        col = mat[:, j]
        order = np.sort(col)
        out[:, j] = [int(np.searchsorted(order, v) + 1) for v in col]
    return RankedMeanTable(groups, list(FEATURE_NAMES), means, ranks, rank_axis)


def histogram(values, bin_count: int = 30,
              shared_range: tuple[float, float] | None = None) -> Histogram:
    """Equal-width histogram, optionally over a shared (lo, hi) range."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise HydroclimError("histogram of an empty sample")
    if bin_count < 1:
        raise ParameterError(f"bin_count must be >= 1, got {bin_count}")
    below = above = 0
    if shared_range is not None:
        lo, hi = shared_range
        if not lo < hi:
            raise ParameterError(f"shared_range needs lo < hi, got {shared_range}")
        below = int((x < lo).sum())
        above = int((x > hi).sum())
        x = np.clip(x, lo, hi)
    else:
        lo, hi = float(x.min()), float(x.max())
        if lo == hi:
            eps = max(abs(lo), 1.0) * 1e-9
            edges = np.array([lo - eps / 2, lo + eps / 2])
            return Histogram(edges, np.array([x.size]))
    counts, edges = np.histogram(x, bins=bin_count, range=(lo, hi))
    return Histogram(edges, counts, below, above)


def feature_correlations(table: pd.DataFrame) -> pd.DataFrame:
    """8x8 Pearson correlation matrix over complete rows.

    Zero-variance features yield NaN in their row/column (undefined, not 0);
    the diagonal is 1 wherever defined.
    """
    data = table[list(FEATURE_NAMES)].dropna()
    if len(data) < 3:
        raise HydroclimError("feature correlations need at least 3 complete rows")
    values = data.to_numpy(dtype=float)
    sd = values.std(axis=0)
    corr = np.full((len(FEATURE_NAMES), len(FEATURE_NAMES)), np.nan)
    ok = sd > 0
    if ok.any():
        sub = np.corrcoef(values[:, ok], rowvar=False)
        corr[np.ix_(ok, ok)] = sub
    return pd.DataFrame(corr, index=FEATURE_NAMES, columns=FEATURE_NAMES)


def group_counts(table: pd.DataFrame, grouping: str) -> dict[str, int]:
    """Station counts per group, unclassified rows under an explicit marker."""
    if grouping == "global":
        return {"global": len(table)}
    column = _GROUP_COLUMN.get(grouping)
    if column is None:
        raise ParameterError(f"unknown grouping {grouping!r}")
    counts: dict[str, int] = {}
    for value in table[column]:
        key = UNCLASSIFIED if pd.isna(value) or value == UNCLASSIFIED else str(value)
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))
