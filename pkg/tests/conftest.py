"""Shared oracles and data builders for the test suite.

The oracles here are deliberately independent of the implementation paths
they check: the characteristic-polynomial eigensolver never touches the
Jacobi code, and the spherical grid search never touches any eigensolver.
"""

from __future__ import annotations

import numpy as np

from basket_miner.marketdata import SESSION_START, SESSION_END, TickRecord


def charpoly_min_eig(a: np.ndarray, grid_points: int = 4000) -> tuple[float, np.ndarray]:
    """Smallest eigenpair via characteristic polynomial plus inverse iteration.

    Coefficients come from the Faddeev-LeVerrier recursion; the leftmost real
    root is bracketed by a sign scan from below the spectrum and refined by
    bisection; the eigenvector follows from shifted inverse iteration (plain
    LU solves, no eigensolver involved).
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    mk = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ mk) / k

    def poly(x: float) -> float:
        r = 0.0
        for c in coeffs:
            r = r * x + c
        return r

    radius = float(np.linalg.norm(a, "fro")) + 1.0
    base_sign = (-1.0) ** n  # sign of the polynomial left of every root
    xs = np.linspace(-radius, radius, grid_points)
    lo = xs[0]
    hi = None
    for x in xs[1:]:
        if poly(x) * base_sign <= 0.0:
            hi = x
            break
        lo = x
    assert hi is not None, "no sign change found: widen the bracket"
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poly(mid) * base_sign > 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)

    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    shifted = a - (lam + 1e-9) * eye
    for _ in range(50):
        v = np.linalg.solve(shifted, v)
        v = v / np.linalg.norm(v)
    return lam, v


def grid_min_quadform(a: np.ndarray, deg_step: float = 1.0) -> tuple[float, np.ndarray]:
    """Minimize w' a w over a 1-degree spherical grid of unit 3-vectors."""
    theta = np.deg2rad(np.arange(0.0, 180.0, deg_step))
    phi = np.deg2rad(np.arange(0.0, 360.0, deg_step))
    t, p = np.meshgrid(theta, phi, indexing="ij")
    w = np.stack(
        [np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1
    ).reshape(-1, 3)
    q = np.einsum("ij,jk,ik->i", w, a, w)
    i = int(np.argmin(q))
    return float(q[i]), w[i]


def random_unit_vectors(n_vectors: int, dim: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((n_vectors, dim))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def dense_day_ticks(
    symbol: int,
    day: str,
    seed: int = 0,
    spacing: float = 5.0,
    first: float = SESSION_START - 5.0,
) -> list[TickRecord]:
    """A full synthetic session of 2-decimal ticks, one trade every ``spacing`` s.

    Prices walk on the cent grid so midprices stay exactly representable on
    the micro-price grid.
    """
    rng = np.random.default_rng(seed)
    times = np.arange(first, SESSION_END + spacing, spacing)
    cents = 100000 + np.cumsum(rng.integers(-2, 3, size=len(times)))
    out = []
    for ts, c in zip(times, cents):
        price = float(c) / 100.0
        bid = float(c - 1) / 100.0
        ask = float(c + 1) / 100.0
        out.append(TickRecord(symbol, float(ts), bid, ask, price, day))
    return out


def cumsum_per_day(values: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
    """Per-day cumulative sums of an increment matrix (test-side identity)."""
    out = np.empty_like(values)
    t_len = values.shape[1]
    edges = list(boundaries) + [t_len]
    for lo, hi in zip(edges[:-1], edges[1:]):
        out[:, lo:hi] = np.cumsum(values[:, lo:hi], axis=1)
    return out
