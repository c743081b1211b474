"""Synthetic market generation and null-distribution experiments.

Provides the IID Gaussian null market, a planted mean-reverting market
(a common AR(1) mode with negative coefficient loaded onto every stock),
exact fractional Gaussian noise via circulant spectral embedding, and the
Monte Carlo experiments that calibrate the mining pipeline: the
distribution of the minimized basket autocorrelation under independence,
and the Hurst distribution of randomly weighted baskets.

All draws flow from counter-based Philox streams keyed on (seed, path),
so ensembles are reproducible regardless of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ContractViolationError, EmbeddingFailureError, UnsupportedSizeError
from .lagcorr import basket_series, lagged_corr, min_eigvec, normalize
from .marketdata import IncrementPanel
from .stats import hurst_periodogram, sample_autocorr


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox stream for (seed, path); safe to draw in parallel."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(path))))


def derive_seed(seed: int, *path: int) -> int:
    """64-bit child seed for (seed, path), for specs that want a plain integer."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic market.

    ``kind`` is "iid" (independent standard normal increments) or "planted"
    (x[i,t] = beta_i * u_t + noise_scale * eps[i,t] with u an AR(1) of
    coefficient ``phi`` and unit innovation variance). When ``loadings`` is
    None the planted loadings are drawn uniformly from ``loading_range``.
    """

    n_stocks: int = 30
    n_days: int = 1
    bars_per_day: int = 4140
    step_seconds: int = 5
    seed: int = 0
    kind: str = "iid"
    phi: float = 0.0
    loadings: np.ndarray | None = None
    loading_range: tuple[float, float] = (0.5, 1.0)
    noise_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n_stocks < 2:
            raise ContractViolationError("need at least 2 stocks")
        if self.kind not in ("iid", "planted"):
            raise ContractViolationError(f"unknown kind {self.kind!r}")
        if not abs(self.phi) < 1.0:
            raise ContractViolationError(f"|phi| must be < 1, got {self.phi}")
        if self.noise_scale <= 0.0:
            raise ContractViolationError("noise_scale must be positive")
        if self.n_days < 1 or self.bars_per_day < 2:
            raise ContractViolationError("need n_days >= 1 and bars_per_day >= 2")

    @property
    def total_increments(self) -> int:
        return self.n_days * self.bars_per_day


def _empty_panel(spec: SynthSpec, values: np.ndarray) -> IncrementPanel:
    return IncrementPanel(
        values=values,
        day_boundaries=np.arange(spec.n_days, dtype=np.int64) * spec.bars_per_day,
        step_seconds=spec.step_seconds,
        symbols=tuple(range(spec.n_stocks)),
        days=tuple(f"synth{d:03d}" for d in range(spec.n_days)),
    )


def synth_iid(spec: SynthSpec) -> IncrementPanel:
    """IID standard normal increments, independent across stocks and time."""
    rng = substream(spec.seed)
    values = rng.standard_normal((spec.n_stocks, spec.total_increments))
    return _empty_panel(spec, values)


@njit(cache=True, nogil=True)
def _ar1_filter(innovations, phi, u0):  # pragma: no cover - exercised via planted_market
    n = innovations.shape[0]
    out = np.empty(n)
    prev = u0
    for t in range(n):
        prev = phi * prev + innovations[t]
        out[t] = prev
    return out


@dataclass
class PlantedMarket:
    """A planted market plus its ground truth.

    ``direction`` is the normalized loading vector beta/||beta|| (zeros when
    all loadings are zero); ``population_minimizer`` gives the vector the
    sample minimization should actually recover.
    """

    panel: IncrementPanel
    loadings: np.ndarray
    direction: np.ndarray


def planted_market(spec: SynthSpec) -> PlantedMarket:
    """Generate x[i,t] = beta_i * u_t + noise, with u a stationary AR(1).

    The common mode u has unit innovation variance and is continuous across
    synthetic days (the day structure only marks bar bookkeeping).
    """
    if spec.kind != "planted":
        raise ContractViolationError("planted_market requires kind='planted'")
    t_len = spec.total_increments
    if spec.loadings is not None:
        beta = np.asarray(spec.loadings, dtype=np.float64)
        if beta.shape != (spec.n_stocks,):
            raise ContractViolationError("loadings must have one entry per stock")
    else:
        lo, hi = spec.loading_range
        beta = substream(spec.seed, 1).uniform(lo, hi, size=spec.n_stocks)
    rng_u = substream(spec.seed, 2)
    sigma_u = 1.0 / np.sqrt(1.0 - spec.phi ** 2)
    u0 = rng_u.standard_normal() * sigma_u  # stationary start
    u = _ar1_filter(rng_u.standard_normal(t_len), spec.phi, u0)
    eps = substream(spec.seed, 3).standard_normal((spec.n_stocks, t_len))
    values = beta[:, None] * u[None, :] + spec.noise_scale * eps
    norm = np.linalg.norm(beta)
    direction = beta / norm if norm > 0 else np.zeros_like(beta)
    return PlantedMarket(panel=_empty_panel(spec, values), loadings=beta, direction=direction)


def population_lag1_matrix(spec: SynthSpec, loadings: np.ndarray) -> np.ndarray:
    """Closed-form population lag-1 matrix of volatility-normalized increments.

    For the planted model, Var(x_i) = beta_i^2 * sigma_u^2 + noise^2 with
    sigma_u^2 = 1/(1 - phi^2), and the lag-1 cross-covariance is
    beta_i beta_j phi sigma_u^2, so after normalization

        C[i, j] = phi * sigma_u^2 * b_i * b_j,   b_i = beta_i / sd(x_i).

    The matrix is rank one and already symmetric.
    """
    beta = np.asarray(loadings, dtype=np.float64)
    sigma_u2 = 1.0 / (1.0 - spec.phi ** 2)
    sd = np.sqrt(beta ** 2 * sigma_u2 + spec.noise_scale ** 2)
    b = beta / sd
    return spec.phi * sigma_u2 * np.outer(b, b)


def population_minimizer(spec: SynthSpec, loadings: np.ndarray) -> tuple[np.ndarray, float]:
    """Closed-form minimum eigenpair of the population lag-1 matrix (phi < 0).

    The rank-one matrix phi*sigma_u^2*b b' has eigenvalues
    phi*sigma_u^2*||b||^2 (eigenvector b/||b||) and 0; with phi < 0 the
    former is the minimum. Uses the same sign convention as min_eigvec.
    """
    if spec.phi >= 0.0:
        raise ContractViolationError("closed-form minimizer requires phi < 0")
    beta = np.asarray(loadings, dtype=np.float64)
    sigma_u2 = 1.0 / (1.0 - spec.phi ** 2)
    sd = np.sqrt(beta ** 2 * sigma_u2 + spec.noise_scale ** 2)
    b = beta / sd
    nb = np.linalg.norm(b)
    if nb == 0.0:
        raise ContractViolationError("all-zero loadings: no planted mode to recover")
    e = b / nb
    pivot = int(np.argmax(np.abs(e)))
    if e[pivot] < 0.0:
        e = -e
    return e, float(spec.phi * sigma_u2 * nb ** 2)


def _null_one_run(n_stocks: int, t_len: int, seed: int) -> float:
    spec = SynthSpec(n_stocks=n_stocks, n_days=1, bars_per_day=t_len, seed=seed)
    panel = synth_iid(spec)
    weights = min_eigvec(lagged_corr(normalize(panel), k=1))
    return sample_autocorr(basket_series(weights, panel), k=1).rho


def null_min_autocorr(
    t_list=(5000, 10000, 20000),
    runs: int = 2000,
    n_stocks: int = 30,
    seed: int = 0,
    n_threads: int = 1,
) -> dict[int, np.ndarray]:
    """Distribution of the minimized basket rho_hat(1) under independence.

    For each series length T, ``runs`` IID markets are generated, the
    minimum-eigenvalue basket is built, and its lag-1 autocorrelation
    recorded. This is the null against which the minimized in-sample values
    must be judged: they are minima over weights, so the plain 2/sqrt(n)
    band does not apply.
    """
    out: dict[int, np.ndarray] = {}
    for t_len in t_list:
        t_len = int(t_len)
        seeds = [derive_seed(seed, t_len, r) for r in range(runs)]
        if n_threads > 1:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                vals = list(pool.map(lambda s: _null_one_run(n_stocks, t_len, s), seeds))
        else:
            vals = [_null_one_run(n_stocks, t_len, s) for s in seeds]
        out[t_len] = np.asarray(vals)
    return out


def fgn(hurst: float, n: int, seed: int = 0) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant spectral embedding.

    Returns a length-``n`` stationary Gaussian series with autocovariance
    r(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2 (unit variance), using
    the Davies-Harte construction; ``n`` must be a power of two. H = 0.5
    reduces to IID standard normals.
    """
    if not 0.0 < hurst < 1.0:
        raise ContractViolationError(f"H must be in (0, 1), got {hurst}")
    n = int(n)
    if n < 2 or (n & (n - 1)) != 0:
        raise UnsupportedSizeError(f"fgn needs n a power of two, got {n}")
    k = np.arange(n + 1, dtype=np.float64)
    r = 0.5 * ((k + 1.0) ** (2 * hurst) - 2.0 * k ** (2 * hurst) + np.abs(k - 1.0) ** (2 * hurst))
    row = np.concatenate([r[:n], [r[n]], r[n - 1 : 0 : -1]])
    lam = np.fft.fft(row).real
    lam_max = lam.max()
    if lam.min() < -1e-8 * lam_max:
        raise EmbeddingFailureError(hurst, n)
    lam = np.clip(lam, 0.0, None)
    g = substream(seed).standard_normal(2 * n)
    w = np.empty(2 * n, dtype=np.complex128)
    w[0] = np.sqrt(lam[0] / (2 * n)) * g[0]
    w[n] = np.sqrt(lam[n] / (2 * n)) * g[n]
    amp = np.sqrt(lam[1:n] / (4 * n))
    w[1:n] = amp * (g[1:n] + 1j * g[n + 1 :])
    w[n + 1 :] = np.conj(w[1:n])[::-1]
    return np.fft.fft(w)[:n].real


def hurst_null(
    runs: int,
    d_days: int,
    source: IncrementPanel,
    seed: int = 0,
) -> np.ndarray:
    """Hurst estimates of randomly weighted baskets over random day windows.

    Each run draws a uniform window of ``d_days`` consecutive days from the
    source panel and a random unit-norm weight vector, forms the basket and
    estimates H by the periodogram method. The result is the benchmark
    distribution for judging the mined baskets' Hurst values.
    """
    if source.n_days < d_days:
        raise ContractViolationError(f"source has {source.n_days} days, need >= {d_days}")
    n_stocks = source.values.shape[0]
    out = np.empty(runs)
    for r in range(runs):
        rng = substream(seed, r)
        start = int(rng.integers(0, source.n_days - d_days + 1))
        w = rng.standard_normal(n_stocks)
        w /= np.linalg.norm(w)
        window = source.day_slice(start, start + d_days)
        out[r] = hurst_periodogram(w @ window.values).h
    return out
