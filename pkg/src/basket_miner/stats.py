"""Core estimators: sample autocorrelation, its significance bound,
the periodogram, and the log-periodogram Hurst estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InsufficientDataError


@dataclass(frozen=True)
class AutocorrEstimate:
    """Sample autocorrelation at one lag, with its 95% significance bound.

    ``ci_halfwidth`` is 2/sqrt(n): under IID increments rho_hat(1) is
    asymptotically N(0, 1/n), so values inside +-2/sqrt(n) are consistent
    with no autocorrelation.
    """

    rho: float
    lag: int
    n: int
    ci_halfwidth: float


@dataclass(frozen=True)
class HurstEstimate:
    """Raw (unclipped) periodogram-regression Hurst estimate, H = (1 - slope)/2."""

    h: float
    n_frequencies_used: int
    slope: float


def sample_autocorr(y, k: int = 1, boundaries=None) -> AutocorrEstimate:
    """Sample autocorrelation coefficient at lag ``k``.

        rho_hat(k) = sum_{i=1..n-k} (y_i - ybar)(y_{i+k} - ybar)
                     / sum_{i=1..n} (y_i - ybar)^2

    When ``boundaries`` (sorted day-start indices) is given, numerator terms
    whose index pair straddles a day boundary are omitted; the denominator
    is unchanged. Constant series raise DegenerateSeriesError rather than
    producing NaN.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    k = int(k)
    if k < 1:
        raise InsufficientDataError(f"lag must be >= 1, got {k}")
    if n < k + 2:
        raise InsufficientDataError(f"need at least {k + 2} observations for lag {k}, got {n}")
    if np.all(y == y[0]):
        raise DegenerateSeriesError("constant series: autocorrelation denominator is zero")
    dev = y - y.mean()
    den = float(dev @ dev)
    if den == 0.0:
        raise DegenerateSeriesError("zero-variance series")
    a = dev[: n - k]
    b = dev[k:]
    if boundaries is not None and len(boundaries) > 0:
        bounds = np.asarray(boundaries, dtype=np.int64)
        day_of = np.searchsorted(bounds, np.arange(n), side="right")
        same_day = day_of[: n - k] == day_of[k:]
        num = float(a[same_day] @ b[same_day])
    else:
        num = float(a @ b)
    return AutocorrEstimate(rho=num / den, lag=k, n=n, ci_halfwidth=2.0 / math.sqrt(n))


def ci_halfwidth(n: int) -> float:
    """95% significance half-width for rho_hat(1) under the IID null: 2/sqrt(n)."""
    if n < 4:
        raise InsufficientDataError(f"need n >= 4 for the significance bound, got {n}")
    return 2.0 / math.sqrt(n)


def periodogram(y) -> tuple[np.ndarray, np.ndarray]:
    """Periodogram at the positive Fourier frequencies.

    Returns (lambda_j, I_j) for j = 1..floor((n-1)/2) with
    lambda_j = 2*pi*j/n and I_j = |sum_t y_t exp(-i t lambda_j)|^2 / (2 pi n).
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < 16:
        raise InsufficientDataError(f"periodogram needs n >= 16, got {n}")
    m = (n - 1) // 2
    spec = np.fft.rfft(y)[1 : m + 1]
    freqs = 2.0 * np.pi * np.arange(1, m + 1) / n
    intens = (spec.real ** 2 + spec.imag ** 2) / (2.0 * np.pi * n)
    return freqs, intens


def hurst_periodogram(y) -> HurstEstimate:
    """Hurst exponent from a log-log regression on the low-frequency periodogram.

    OLS of log I_j on log lambda_j over the lowest m = floor(sqrt(n)) Fourier
    frequencies; for increments of a process with Hurst exponent H the slope
    is 1 - 2H, so H = (1 - slope)/2. Exactly-zero intensities among the m
    lowest frequencies are skipped; fewer than 8 usable frequencies is an
    error.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < 256:
        raise InsufficientDataError(f"Hurst estimation needs n >= 256, got {n}")
    freqs, intens = periodogram(y)
    m = int(math.isqrt(n))
    freqs = freqs[:m]
    intens = intens[:m]
    usable = intens > 0.0
    n_used = int(usable.sum())
    if n_used < 8:
        raise InsufficientDataError(
            f"only {n_used} non-zero periodogram ordinates among the {m} lowest frequencies"
        )
    lx = np.log(freqs[usable])
    ly = np.log(intens[usable])
    lx_c = lx - lx.mean()
    slope = float((lx_c @ (ly - ly.mean())) / (lx_c @ lx_c))
    return HurstEstimate(h=(1.0 - slope) / 2.0, n_frequencies_used=n_used, slope=slope)
