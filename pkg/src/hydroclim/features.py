"""The eight interpretable features of a standardized quarterly series.

Autocorrelation family (lag-1, summed squares over lags 1..10, lag-4),
temporal variation (sd of first differences), spectral entropy of the raw
periodogram, the maximum-likelihood Hurst exponent of fractional Gaussian
noise fitted to the classically deseasonalized series, and STL-based trend
and seasonality strengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from numba import njit
from scipy.fft import next_fast_len, rfft
from scipy.linalg import toeplitz

from .decomp import Decomposition, StlParams, classical_decompose, stl_decompose
from .errors import (
    ConditioningError,
    DegenerateDecompositionError,
    HydroclimError,
    LengthError,
    ParameterError,
    ZeroVarianceError,
)
from .series import QuarterlySeries, StandardizedSeries, first_difference, standardize

HURST_BOUNDS = (0.01, 0.99)

FEATURE_NAMES = (
    "lag1_ac",
    "ac_summary",
    "seasonal_ac",
    "temp_variation",
    "spec_entropy",
    "hurst",
    "trend_strength",
    "seasonality_strength",
)


@dataclass(frozen=True)
class FeatureVector:
    """The eight feature values of one series, in declared bounds."""

    lag1_ac: float
    ac_summary: float
    seasonal_ac: float
    temp_variation: float
    spec_entropy: float
    hurst: float
    trend_strength: float
    seasonality_strength: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def check_bounds(self) -> None:
        """Raise if any declared bound is violated."""
        checks = [
            (-1.0 <= self.lag1_ac <= 1.0, "lag1_ac in [-1, 1]"),
            (0.0 <= self.ac_summary <= 10.0, "ac_summary in [0, 10]"),
            (-1.0 <= self.seasonal_ac <= 1.0, "seasonal_ac in [-1, 1]"),
            (self.temp_variation >= 0.0, "temp_variation >= 0"),
            (0.0 <= self.spec_entropy <= 1.0, "spec_entropy in [0, 1]"),
            (HURST_BOUNDS[0] <= self.hurst <= HURST_BOUNDS[1],
             f"hurst in {list(HURST_BOUNDS)}"),
            (0.0 <= self.trend_strength <= 1.0, "trend_strength in [0, 1]"),
            (0.0 <= self.seasonality_strength <= 1.0,
             "seasonality_strength in [0, 1]"),
        ]
        for ok, what in checks:
            if not ok:
                raise HydroclimError(f"feature bound violated: {what}")


@dataclass(frozen=True)
class FgnModel:
    """Fitted fractional Gaussian noise: Hurst H, location mu, scale sigma."""

    H: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ParameterError(f"H must be inside (0, 1), got {self.H}")
        if self.sigma <= 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


def _values(series) -> np.ndarray:
    if isinstance(series, (StandardizedSeries, QuarterlySeries)):
        return series.values
    return np.asarray(series, dtype=float)


def sample_acf(values, max_lag: int) -> np.ndarray:
    """Sample autocorrelations r_1..r_max_lag (common-denominator estimator).

    Computed via FFT; equals the direct O(n^2) formula to rounding error.
    """
    x = _values(values)
    n = x.size
    if not 1 <= max_lag < n:
        raise ParameterError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    dev = x - x.mean()
    denom = float(dev @ dev)
    if denom == 0.0:
        raise ZeroVarianceError("sample ACF of a constant series is undefined")
    nfft = next_fast_len(2 * n)
    spec = np.abs(rfft(dev, nfft)) ** 2
    acov = np.fft.irfft(spec, nfft)[: max_lag + 1]
    return acov[1:] / denom


def acf_features(series) -> tuple[float, float, float]:
    """(lag-1 autocorrelation, sum of squared r_1..r_10, lag-4 autocorrelation)."""
    x = _values(series)
    if x.size < 12:
        raise LengthError("autocorrelation features need at least 12 values")
    r = sample_acf(x, 10)
    return float(r[0]), float(np.sum(r ** 2)), float(r[3])


def temporal_variation(series) -> float:
    """Sample sd (n-1) of the first-differenced series."""
    x = _values(series)
    if x.size < 3:
        raise LengthError("temporal variation needs at least 3 values")
    return float(np.std(first_difference(x), ddof=1))


def spectral_entropy(series, smoothing_window: int | None = None) -> float:
    """Normalized Shannon entropy of the periodogram, in [0, 1].

    Raw periodogram at Fourier frequencies j/n, j = 1..n//2, after
    demeaning; ordinates normalized to probabilities and the entropy
    divided by ln of the ordinate count.  ``smoothing_window`` applies an
    optional odd-width Daniell (flat moving-average) smoother first.
    """
    x = _values(series)
    n = x.size
    if n < 8:
        raise LengthError("spectral entropy needs at least 8 values")
    dev = x - x.mean()
    pgram = np.abs(np.fft.rfft(dev)[1:]) ** 2
    if smoothing_window is not None:
        w = int(smoothing_window)
        if w < 1 or w % 2 == 0:
            raise ParameterError("smoothing_window must be a positive odd integer")
        if w > 1:
            kernel = np.full(w, 1.0 / w)
            norm = np.convolve(np.ones_like(pgram), kernel, mode="same")
            pgram = np.convolve(pgram, kernel, mode="same") / norm
    total = pgram.sum()
    if total <= 0.0:
        raise ZeroVarianceError("spectral entropy of a constant series is undefined")
    p = pgram / total
    p = p[p > 0]
    return float(-(p @ np.log(p)) / math.log(pgram.size))


def fgn_autocorrelation(k, H: float):
    """Autocorrelation of fractional Gaussian noise at integer lag(s) k."""
    if not 0.0 < H < 1.0:
        raise ParameterError(f"H must be inside (0, 1), got {H}")
    k = np.abs(np.asarray(k, dtype=float))
    rho = 0.5 * (np.abs(k + 1) ** (2 * H) - 2 * k ** (2 * H)
                 + np.abs(k - 1) ** (2 * H))
    rho = np.where(k == 0, 1.0, rho)
    return float(rho) if rho.ndim == 0 else rho


@njit(cache=True)
def _fgn_profile_loglik(x, H):
    """Profile Gaussian log-likelihood of fGn at fixed H.

    The location and scale are concentrated out in closed form through the
    generalized-least-squares mean and residual quadratic form.  The
    Toeplitz correlation matrix is handled by a Levinson-Durbin recursion
    that whitens the data and the ones vector simultaneously, giving the
    quadratic forms and the log-determinant in O(n^2).
    Returns (loglik, mu_hat, sigma2_hat).
    """
    n = x.size
    rho = np.empty(n)
    rho[0] = 1.0
    h2 = 2.0 * H
    for k in range(1, n):
        rho[k] = 0.5 * ((k + 1.0) ** h2 - 2.0 * k ** h2 + (k - 1.0) ** h2)

    phi = np.zeros(n)
    prev = np.zeros(n)
    v = 1.0
    logdet = 0.0
    ex = x[0]
    eo = 1.0
    sxx = ex * ex
    soo = eo * eo
    sxo = ex * eo
    for k in range(1, n):
        acc = rho[k]
        for j in range(1, k):
            acc -= phi[j - 1] * rho[k - j]
        refl = acc / v
        for j in range(k - 1):
            prev[j] = phi[j]
        for j in range(k - 1):
            phi[j] = prev[j] - refl * prev[k - 2 - j]
        phi[k - 1] = refl
        v = v * (1.0 - refl * refl)
        if v <= 0.0 or not np.isfinite(v):
            return -np.inf, 0.0, 0.0
        logdet += np.log(v)
        px = 0.0
        po = 0.0
        for j in range(k):
            px += phi[j] * x[k - 1 - j]
            po += phi[j]
        ex = x[k] - px
        eo = 1.0 - po
        sxx += ex * ex / v
        soo += eo * eo / v
        sxo += ex * eo / v

    mu = sxo / soo
    q = sxx - sxo * sxo / soo
    if q <= 0.0 or not np.isfinite(q):
        return -np.inf, mu, 0.0
    sigma2 = q / n
    ll = (-0.5 * n * np.log(2.0 * np.pi) - 0.5 * n * np.log(sigma2)
          - 0.5 * logdet - 0.5 * n)
    return ll, mu, sigma2


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def hurst_ml(deseasonalized) -> FgnModel:
    """Maximum-likelihood fGn fit over H in [0.01, 0.99].

    A coarse grid (step 0.01) seeds a golden-section refinement to
    |dH| < 1e-4; location and scale are profiled out at each H.  The
    search saturates (rather than fails) at the bounds.
    """
    x = np.ascontiguousarray(_values(deseasonalized), dtype=float)
    if x.size < 8:
        raise LengthError("Hurst estimation needs at least 8 values")
    if np.ptp(x) == 0.0:
        raise ZeroVarianceError("Hurst estimation of a constant series")
    lo, hi = HURST_BOUNDS
    grid = np.round(np.arange(lo, hi + 1e-9, 0.01), 10)
    lls = np.array([_fgn_profile_loglik(x, h)[0] for h in grid])
    if not np.isfinite(lls).any():
        raise ConditioningError(
            "fGn likelihood is non-finite over the whole H grid"
        )
    best = int(np.argmax(lls))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _fgn_profile_loglik(x, c)[0]
    fd = _fgn_profile_loglik(x, d)[0]
    while b - a > 1e-4:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _fgn_profile_loglik(x, c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _fgn_profile_loglik(x, d)[0]
    h_hat = (a + b) / 2.0
    ll, mu, sigma2 = _fgn_profile_loglik(x, h_hat)
    if not np.isfinite(ll):
        raise ConditioningError(f"fGn likelihood non-finite at H = {h_hat}")
    return FgnModel(h_hat, float(mu), float(math.sqrt(sigma2)))


def simulate_fgn(n: int, H: float, seed: int) -> np.ndarray:
    """Exact zero-mean unit-scale fGn sample via Cholesky of the Toeplitz
    correlation matrix; deterministic given the seed."""
    if not 0.0 < H < 1.0:
        raise ParameterError(f"H must be inside (0, 1), got {H}")
    if n < 2:
        raise LengthError("need n >= 2")
    rho = fgn_autocorrelation(np.arange(n), H)
    chol = np.linalg.cholesky(toeplitz(rho))
    rng = np.random.default_rng(seed)
    return chol @ rng.standard_normal(n)


def strengths(series, stl: Decomposition) -> tuple[float, float]:
    """(trend strength, seasonality strength) from an STL decomposition.

    1 minus the remainder variance over the variance of the detrended or
    deseasonalized series, clamped to [0, 1].
    """
    r = stl.remainder
    var_detrended = float(np.var(stl.seasonal + r))
    var_deseasonalized = float(np.var(stl.trend + r))
    if var_deseasonalized == 0.0 or var_detrended == 0.0:
        raise DegenerateDecompositionError(
            "strengths undefined: zero reference variance"
        )
    var_r = float(np.var(r))
    trend = min(1.0, max(0.0, 1.0 - var_r / var_deseasonalized))
    seasonal = min(1.0, max(0.0, 1.0 - var_r / var_detrended))
    return trend, seasonal


def extract_features(
    series: QuarterlySeries,
    stl_params: StlParams = StlParams(),
    spectral_smoothing: int | None = None,
) -> FeatureVector:
    """Compute the full FeatureVector of one quarterly series.

    All features operate on the standardized series, so the result is
    invariant to positive affine transforms of the input.  Errors carry the
    station id.
    """
    try:
        std = standardize(series)
        lag1, summary, lag4 = acf_features(std)
        tv = temporal_variation(std)
        entropy = spectral_entropy(std, spectral_smoothing)
        classical = classical_decompose(std.values, period=4)
        model = hurst_ml(classical.deseasonalized(std.values))
        stl = stl_decompose(std.values, period=4, params=stl_params)
        trend_s, seasonal_s = strengths(std, stl)
    except HydroclimError as exc:
        raise type(exc)(f"station {series.station.station_id}: {exc}") from exc
    return FeatureVector(lag1, summary, lag4, tv, entropy, model.H,
                         trend_s, seasonal_s)
