"""Time-series decomposition: Loess smoothing, classical additive and STL.

Classical decomposition (period 4) supplies the deseasonalized series used
for long-range dependence estimation; STL supplies the components behind the
trend/seasonality strength features.  Both are additive; the remainder is
defined as input minus seasonal minus trend, so STL reconstruction is exact
by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, LengthError, ParameterError

_HAT_CACHE: dict = {}


@dataclass(frozen=True)
class StlParams:
    """STL tuning knobs.

    seasonal_window is either the string "periodic" (cycle-subseries means)
    or an odd integer Loess window over each cycle subseries.  The usual
    1.5 * period rule would put the trend window at 7, which at period 4 is
    short enough for the trend to absorb a third of a white-noise input's
    variance; the default of 13 keeps pure noise out of the trend while
    still tracking smooth trends closely.  The low-pass window default is
    the next odd integer >= period.
    """

    seasonal_window: int | str = "periodic"
    seasonal_degree: int = 0
    trend_window: int = 13
    trend_degree: int = 1
    lowpass_window: int = 5
    lowpass_degree: int = 1
    inner_iterations: int = 2


@dataclass
class Decomposition:
    """Additive seasonal/trend/remainder split of one series.

    For the classical method the first and last period//2 trend (and
    remainder) slots are NaN, the 2 x period moving average being undefined
    there.  ``seasonal_indices`` holds the period-length cycle for the
    classical method, None for STL.
    """

    seasonal: np.ndarray = field(repr=False)
    trend: np.ndarray = field(repr=False)
    remainder: np.ndarray = field(repr=False)
    method: str = "stl"
    seasonal_indices: np.ndarray | None = None

    def deseasonalized(self, values: np.ndarray) -> np.ndarray:
        """input - seasonal, full length (trend edges do not matter here)."""
        return np.asarray(values, dtype=float) - self.seasonal


def _tricube(u: np.ndarray) -> np.ndarray:
    w = np.clip(1.0 - np.abs(u) ** 3, 0.0, None)
    return w ** 3


def _local_fit(x: np.ndarray, y: np.ndarray, q: int, degree: int,
               x0: float) -> float:
    """Weighted local polynomial fit over the q nearest points, value at x0."""
    d = np.abs(x - x0)
    if q < x.size:
        order = np.argsort(d, kind="stable")[:q]
    else:
        order = np.arange(x.size)
    xs, ys, ds = x[order], y[order], d[order]
    dmax = ds.max()
    if dmax == 0.0:
        return float(ys[0])
    w = _tricube(ds / dmax)
    pos = w > 0
    if int(pos.sum()) < degree + 1:
        raise FitError(
            f"loess window of {q} points leaves {int(pos.sum())} positive "
            f"weights, need {degree + 1}"
        )
    xs, ys, w = xs[pos], ys[pos], w[pos]
    if degree == 0:
        return float(np.sum(w * ys) / np.sum(w))
    X = np.vander(xs - x0, degree + 1, increasing=True)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], ys * sw, rcond=None)
    return float(coef[0])


def _uniform_hat(n: int, q: int, degree: int) -> np.ndarray:
    """Smoother matrix for loess on the unit grid 0..n-1 (memoized)."""
    key = (n, q, degree)
    hat = _HAT_CACHE.get(key)
    if hat is None:
        x = np.arange(n, dtype=float)
        hat = np.zeros((n, n))
        for i in range(n):
            d = np.abs(x - i)
            order = np.sort(np.argsort(d, kind="stable")[:q])
            ds = d[order]
            dmax = ds.max()
            w = _tricube(ds / dmax) if dmax > 0 else np.ones_like(ds)
            pos = w > 0
            idx = order[pos]
            ww = w[pos]
            if degree == 0:
                hat[i, idx] = ww / ww.sum()
            else:
                X = np.vander(x[idx] - i, degree + 1, increasing=True)
                A = X.T @ (ww[:, None] * X)
                rows = np.linalg.solve(A, X.T * ww)
                hat[i, idx] = rows[0]
        _HAT_CACHE[key] = hat
    return hat


def _loess_uniform(y: np.ndarray, q: int, degree: int) -> np.ndarray:
    q = min(q, y.size)
    return _uniform_hat(y.size, q, degree) @ y


def loess_smooth(x: np.ndarray, y: np.ndarray, span: float,
                 degree: int = 1) -> np.ndarray:
    """Locally weighted polynomial fit with tricube weights at each x.

    ``span`` is the fraction of points in each local window; x must be
    strictly increasing and span*n must cover at least degree+1 points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ParameterError("x and y must be 1-D arrays of equal length")
    if np.any(np.diff(x) <= 0):
        raise ParameterError("x must be strictly increasing")
    if not 0 < span <= 1:
        raise ParameterError(f"span must be in (0, 1], got {span}")
    if degree not in (0, 1, 2):
        raise ParameterError(f"degree must be 0, 1 or 2, got {degree}")
    n = x.size
    q = int(math.ceil(span * n))
    if q < degree + 1:
        raise FitError(
            f"span {span} gives a {q}-point window, need {degree + 1}"
        )
    steps = np.diff(x)
    if n > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
        return _loess_uniform(y, q, degree)
    return np.array([_local_fit(x, y, q, degree, xi) for xi in x])


def _centered_ma(values: np.ndarray, window: int) -> np.ndarray:
    return np.convolve(values, np.full(window, 1.0 / window), mode="valid")


def classical_decompose(series: np.ndarray, period: int = 4) -> Decomposition:
    """Classical additive decomposition with a 2 x period centered MA trend.

    Seasonal indices are the per-season means of the detrended values,
    centered to zero mean, cyclically repeated over the full length.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    if n < 2 * period:
        raise LengthError(
            f"classical decomposition needs at least {2 * period} values"
        )
    half = period // 2
    if period % 2 == 0:
        # 2 x period MA: average of two adjacent period-length means
        ma = _centered_ma(_centered_ma(y, period), 2)
    else:
        ma = _centered_ma(y, period)
    trend = np.full(n, np.nan)
    trend[half:half + ma.size] = ma
    detrended = y - trend
    indices = np.empty(period)
    for s in range(period):
        vals = detrended[s::period]
        indices[s] = np.nanmean(vals)
    indices -= indices.mean()
    seasonal = np.tile(indices, n // period + 1)[:n]
    remainder = y - seasonal - trend
    return Decomposition(seasonal, trend, remainder, method="classical_additive",
                         seasonal_indices=indices)


def _smooth_subseries(sub: np.ndarray, params: StlParams) -> np.ndarray:
    """Smooth one cycle subseries and extend it by one slot at each end."""
    m = sub.size
    if params.seasonal_window == "periodic":
        return np.full(m + 2, sub.mean())
    q = min(int(params.seasonal_window), m)
    x = np.arange(m, dtype=float)
    inner = loess_smooth(x, sub, span=min(1.0, q / m), degree=params.seasonal_degree)
    lo = _local_fit(x, sub, q, params.seasonal_degree, -1.0)
    hi = _local_fit(x, sub, q, params.seasonal_degree, float(m))
    return np.concatenate(([lo], inner, [hi]))


def stl_decompose(series: np.ndarray, period: int = 4,
                  params: StlParams = StlParams()) -> Decomposition:
    """Inner-loop STL: cycle-subseries smoothing, low-pass filter, trend Loess.

    No robustness (outer) iterations; remainder is defined as input minus
    seasonal minus trend so the reconstruction identity is exact.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    if n < 2 * period:
        raise LengthError(f"STL needs at least {2 * period} values")
    if n % period != 0:
        raise ParameterError("series length must be a multiple of the period")
    for name in ("trend_window", "lowpass_window"):
        w = getattr(params, name)
        if w % 2 == 0 or w < 3:
            raise ParameterError(f"{name} must be an odd integer >= 3, got {w}")
    if params.seasonal_window != "periodic":
        sw = params.seasonal_window
        if not isinstance(sw, int) or sw % 2 == 0 or sw < 3:
            raise ParameterError(
                f"seasonal_window must be 'periodic' or an odd integer >= 3, "
                f"got {sw!r}"
            )
    if params.inner_iterations < 1:
        raise ParameterError("inner_iterations must be >= 1")

    seasonal = np.zeros(n)
    trend = np.zeros(n)
    cycle = np.empty(n + 2 * period)
    for _ in range(params.inner_iterations):
        detrended = y - trend
        for s in range(period):
            cycle[s::period] = _smooth_subseries(detrended[s::period], params)
        low = _centered_ma(_centered_ma(_centered_ma(cycle, period), period), 3)
        low = _loess_uniform(low, params.lowpass_window, params.lowpass_degree)
        seasonal = cycle[period:period + n] - low
        trend = _loess_uniform(y - seasonal, params.trend_window,
                               params.trend_degree)
    remainder = y - seasonal - trend
    return Decomposition(seasonal, trend, remainder, method="stl")
