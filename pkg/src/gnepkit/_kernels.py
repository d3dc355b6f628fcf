"""Projection kernels used in solver inner loops.

Each kernel has a pure-numpy implementation and (when numba is importable)
a compiled twin.  The active backend is chosen once at import time; set
``GNEPKIT_PURE_NUMPY=1`` to force the numpy path.  Both backends must agree
to machine precision -- the test suite and ``benchmarks/bench_kernels.py``
compare them directly via :data:`IMPLEMENTATIONS`.
"""

from __future__ import annotations

import os

import numpy as np

_FORCED_NUMPY = os.environ.get("GNEPKIT_PURE_NUMPY", "0") == "1"

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via GNEPKIT_PURE_NUMPY
    _HAVE_NUMBA = False

_USE_NUMBA = _HAVE_NUMBA and not _FORCED_NUMPY


def _project_simplex_np(y: np.ndarray, scale: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = scale}, scale > 0."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - scale
    ks = np.arange(1, y.size + 1)
    # the index set {j : u_j > (css_j)/j} is a prefix; take its last element
    k = ks[u - css / ks > 0.0][-1]
    tau = css[k - 1] / k
    return np.maximum(y - tau, 0.0)


def _project_simplex_loop(y, scale):
    n = y.size
    u = np.sort(y)[::-1]
    css = 0.0
    tau = 0.0
    for i in range(n):
        css += u[i]
        t = (css - scale) / (i + 1.0)
        if u[i] - t > 0.0:
            tau = t
    out = np.empty(n)
    for i in range(n):
        v = y[i] - tau
        out[i] = v if v > 0.0 else 0.0
    return out


def _dykstra_np(A, b, y, max_sweeps, tol):
    """Dykstra's alternating projections onto {x : A x <= b}."""
    m, n = A.shape
    x = y.astype(float).copy()
    corr = np.zeros((m, n))
    nrm2 = np.einsum("ij,ij->i", A, A)
    for _ in range(max_sweeps):
        x_prev = x.copy()
        for i in range(m):
            if nrm2[i] == 0.0:
                continue
            w = x + corr[i]
            viol = A[i] @ w - b[i]
            if viol > 0.0:
                x = w - (viol / nrm2[i]) * A[i]
            else:
                x = w
            corr[i] = w - x
        move = np.max(np.abs(x - x_prev)) if m else 0.0
        if move <= 1e-2 * tol + 1e-15:
            resid = A @ x - b
            if not resid.size or resid.max() <= tol:
                break
    return x


def _dykstra_loop(A, b, y, max_sweeps, tol):
    m, n = A.shape
    x = y.copy()
    corr = np.zeros((m, n))
    w = np.empty(n)
    x_prev = np.empty(n)
    nrm2 = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += A[i, j] * A[i, j]
        nrm2[i] = s
    for _ in range(max_sweeps):
        for j in range(n):
            x_prev[j] = x[j]
        for i in range(m):
            if nrm2[i] == 0.0:
                continue
            viol = -b[i]
            for j in range(n):
                w[j] = x[j] + corr[i, j]
                viol += A[i, j] * w[j]
            if viol > 0.0:
                coef = viol / nrm2[i]
                for j in range(n):
                    x[j] = w[j] - coef * A[i, j]
                    corr[i, j] = coef * A[i, j]
            else:
                for j in range(n):
                    x[j] = w[j]
                    corr[i, j] = 0.0
        move = 0.0
        for j in range(n):
            d = abs(x[j] - x_prev[j])
            if d > move:
                move = d
        if move <= 1e-2 * tol + 1e-15:
            worst = -np.inf
            for i in range(m):
                s = -b[i]
                for j in range(n):
                    s += A[i, j] * x[j]
                if s > worst:
                    worst = s
            if m == 0 or worst <= tol:
                break
    return x


IMPLEMENTATIONS = {"numpy": (_project_simplex_np, _dykstra_np)}

if _HAVE_NUMBA:
    _project_simplex_jit = numba.njit(cache=True)(_project_simplex_loop)
    _dykstra_jit = numba.njit(cache=True)(_dykstra_loop)
    IMPLEMENTATIONS["numba"] = (_project_simplex_jit, _dykstra_jit)

_simplex_impl, _dykstra_impl = IMPLEMENTATIONS["numba" if _USE_NUMBA else "numpy"]


def kernel_backend() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def project_simplex(y: np.ndarray, scale: float = 1.0) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if scale <= 0.0:
        raise ValueError("simplex scale must be positive")
    return _simplex_impl(y, float(scale))


def dykstra_halfspaces(
    A: np.ndarray,
    b: np.ndarray,
    y: np.ndarray,
    max_sweeps: int = 10_000,
    tol: float = 1e-10,
) -> np.ndarray:
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if A.shape[0] == 0:
        return y.copy()
    return _dykstra_impl(A, b, y, int(max_sweeps), float(tol))


def warmup() -> None:
    """Trigger JIT compilation of the active backend (no-op for numpy)."""
    project_simplex(np.array([0.3, -0.1, 0.9]), 1.0)
    dykstra_halfspaces(
        np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]),
        np.array([1.0, 1.0, 0.0]),
        np.array([2.0, 2.0]),
        max_sweeps=50,
    )
