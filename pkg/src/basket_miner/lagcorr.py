"""Delay correlation matrix construction and minimum-eigenvalue baskets.

Given volatility-normalized increment rows M (N x T), the lag-k delay
correlation matrix is

    C_hat[i, j] = (1/T) * sum_{t=1..T-k} M[i, t] * M[j, t+k]

which is asymmetric; the quadratic form e' C_hat e equals e' C_sym e for
C_sym = (C_hat + C_hat')/2, so the basket minimizing the lagged quadratic
form is the eigenvector of C_sym with the smallest eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    BasketMinerError,
    ContractViolationError,
    DegenerateStockError,
    InsufficientDataError,
)
from .marketdata import IncrementPanel

DEGENERACY_GAP = 1e-10


@dataclass
class NormalizedPanel:
    """Increment rows divided by their per-stock sample volatility.

    Rows are scaled, not demeaned: the delay correlation formula contains
    no mean subtraction.
    """

    m: np.ndarray  # (n_stocks, T)
    scale_factors: np.ndarray
    day_boundaries: np.ndarray
    symbols: tuple[int, ...]


@dataclass
class LaggedCorrMatrix:
    c_hat: np.ndarray
    c_sym: np.ndarray
    k: int


@dataclass
class BasketWeights:
    """Unit-norm weights attaining the minimum of the lagged quadratic form.

    ``degenerate`` flags a smallest eigenvalue whose gap to the next one is
    below 1e-10, in which case any unit vector of the eigenspace is equally
    valid. Sign convention: the first component of largest magnitude is
    positive.
    """

    e: np.ndarray
    lambda_min: float
    degenerate: bool
    eigenvalues: np.ndarray


def normalize(panel: IncrementPanel) -> NormalizedPanel:
    """Divide each stock's increments by its sample standard deviation (ddof=1)."""
    values = panel.values
    if values.shape[1] < 2:
        raise InsufficientDataError("need at least 2 increments per stock to normalize")
    sds = values.std(axis=1, ddof=1)
    for i, sd in enumerate(sds):
        if sd == 0.0 or np.all(values[i] == values[i, 0]):
            raise DegenerateStockError(panel.symbols[i])
    return NormalizedPanel(
        m=values / sds[:, None],
        scale_factors=sds,
        day_boundaries=panel.day_boundaries,
        symbols=panel.symbols,
    )


def lagged_corr(panel: NormalizedPanel, k: int = 1, exclude_boundaries: bool = True) -> LaggedCorrMatrix:
    """Build C_hat at lag ``k`` and its symmetrization.

    With ``exclude_boundaries`` (the default) products whose (t, t+k) pair
    spans two different days are omitted -- overnight jumps are not bar
    increments. The 1/T prefactor is kept either way.
    """
    m = panel.m
    n_stocks, t_len = m.shape
    k = int(k)
    if k < 1:
        raise ContractViolationError(f"lag must be >= 1, got {k}")
    if t_len <= k:
        raise InsufficientDataError(f"need T > k (T={t_len}, k={k})")
    left = m[:, : t_len - k]
    right = m[:, k:]
    if exclude_boundaries and len(panel.day_boundaries) > 1:
        day_of = np.searchsorted(panel.day_boundaries, np.arange(t_len), side="right")
        same_day = (day_of[: t_len - k] == day_of[k:]).astype(np.float64)
        left = left * same_day
    c_hat = (left @ right.T) / t_len
    c_sym = (c_hat + c_hat.T) / 2.0
    return LaggedCorrMatrix(c_hat=c_hat, c_sym=c_sym, k=k)


@njit(cache=True, nogil=True)
def _jacobi_kernel(a, v, tol, max_sweeps):  # pragma: no cover - exercised via jacobi_eigh
    n = a.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j] * a[i, j]
    fro = math.sqrt(fro)
    thresh = tol * fro
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                if abs(a[i, j]) > off:
                    off = abs(a[i, j])
        if off <= thresh:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + 100.0 * abs(apq) == abs(h):
                    t = apq / h
                else:
                    theta = h / (2.0 * apq)
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] -= t * apq
                a[q, q] += t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = aip - s * (aiq + tau * aip)
                        a[p, i] = a[i, p]
                        a[i, q] = aiq + s * (aip - tau * aiq)
                        a[q, i] = a[i, q]
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip - s * (viq + tau * vip)
                    v[i, q] = viq + s * (vip - tau * viq)
    return -1


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until every off-diagonal magnitude is at most ``tol`` times
    the Frobenius norm (which rotations preserve). Returns eigenvalues in
    ascending order and the corresponding eigenvectors as columns.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    sweeps = _jacobi_kernel(a, v, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise BasketMinerError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigvec(c) -> BasketWeights:
    """Eigenpair with the smallest eigenvalue of the symmetrized matrix.

    Accepts a LaggedCorrMatrix or a plain symmetric array. Raises
    ContractViolationError when the input's asymmetry exceeds 1e-10.
    """
    a = c.c_sym if isinstance(c, LaggedCorrMatrix) else np.asarray(c, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolationError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 2:
        raise ContractViolationError("need at least 2 stocks")
    asym = float(np.abs(a - a.T).max())
    if asym > 1e-10:
        raise ContractViolationError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    w, v = jacobi_eigh(a)
    e = v[:, 0].copy()
    pivot = int(np.argmax(np.abs(e)))
    if e[pivot] < 0.0:
        e = -e
    e = e / np.linalg.norm(e)
    return BasketWeights(
        e=e,
        lambda_min=float(w[0]),
        degenerate=bool(w[1] - w[0] < DEGENERACY_GAP),
        eigenvalues=w,
    )


def basket_series(weights, panel: IncrementPanel) -> np.ndarray:
    """Basket increments B_t = sum_i e_i * x_{i,t} from *raw* increments.

    The weights come from the normalized-increment minimization, but the
    basket itself is formed on the unnormalized panel.
    """
    e = weights.e if isinstance(weights, BasketWeights) else np.asarray(weights, dtype=np.float64)
    if e.shape != (panel.values.shape[0],):
        raise ContractViolationError(
            f"weight dimension {e.shape} does not match panel with {panel.values.shape[0]} stocks"
        )
    return e @ panel.values
