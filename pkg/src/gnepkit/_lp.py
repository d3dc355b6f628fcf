"""Linear-programming helpers (scipy/HiGHS) plus a tiny exact QP maximizer.

All solver-facing feasibility, slack, and support computations funnel through
here so tolerances and failure modes stay in one place.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


class LPError(RuntimeError):
    pass


class InfeasibleLP(LPError):
    pass


class UnboundedLP(LPError):
    pass


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    """linprog with free default bounds and status mapped to exceptions."""
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds if bounds is not None else (None, None),
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleLP(res.message)
    if res.status == 3:
        raise UnboundedLP(res.message)
    if not res.success:
        raise LPError(res.message)
    return res


def max_linear(c, A=None, b=None, A_eq=None, b_eq=None, bounds=None):
    """Maximize c.x over {A x <= b, A_eq x = b_eq}; returns (value, x)."""
    res = solve_lp(-np.asarray(c, dtype=float), A, b, A_eq, b_eq, bounds)
    return -res.fun, res.x


def max_slack(A, b, strict_mask, A_eq=None, b_eq=None, cap=1e6):
    """Largest margin s with A x <= b - s on strict rows (A x <= b elsewhere).

    Rows must be unit-normalized for s to mean Euclidean distance.  Returns
    (s, x); raises InfeasibleLP when even the closure is empty.  s is capped,
    so a cap-valued result just means "comfortably nonempty".
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    col = np.asarray(strict_mask, dtype=float).reshape(m, 1)
    A_ext = np.hstack([A, col])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, cap)]
    if A_eq is not None:
        A_eq = np.hstack([np.asarray(A_eq, dtype=float), np.zeros((len(b_eq), 1))])
    res = solve_lp(c, A_ext, b, A_eq, b_eq, bounds)
    return -res.fun, res.x[:n]


def chebyshev_center(A, b, A_eq=None, b_eq=None, box=1e6):
    """Deepest point of {A x <= b} (rows unit-normalized): returns (x, r)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    A_ext = np.hstack([A, np.ones((m, 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(-box, box)] * n + [(0.0, 1e3)]
    if A_eq is not None:
        A_eq = np.hstack([np.asarray(A_eq, dtype=float), np.zeros((len(b_eq), 1))])
    res = solve_lp(c, A_ext, b, A_eq, b_eq, bounds)
    return res.x[:n], -res.fun


_ACTIVE_SET_CAP = 100_000


def max_concave_quad(Q, c, A, b, A_eq=None, b_eq=None, feas_tol=1e-8):
    """Maximize 0.5 z'Qz + c'z over {A z <= b, A_eq z = b_eq} exactly.

    Active-set enumeration: every KKT system over a subset of tight rows is
    solved directly and validated (primal feasibility, multiplier signs).
    Exact and deterministic, but exponential in the row count -- intended for
    the small per-player blocks this package works with.  Raises UnboundedLP
    when no KKT point validates (unbounded or badly degenerate problem).
    """
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, Q.shape[0])
    b = np.asarray(b, dtype=float).reshape(-1)
    d = Q.shape[0]
    m = A.shape[0]
    n_eq = 0 if A_eq is None else len(b_eq)
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float).reshape(n_eq, d)
        b_eq = np.asarray(b_eq, dtype=float).reshape(n_eq)

    total = sum(
        _ncr(m, k) for k in range(0, min(m, d - n_eq) + 1)
    )
    if total > _ACTIVE_SET_CAP:
        raise LPError(f"active-set enumeration too large ({total} subsets)")

    best_val, best_z = -np.inf, None
    scale = 1.0 + np.abs(b).max(initial=0.0)
    for k in range(0, min(m, max(d - n_eq, 0)) + 1):
        for S in itertools.combinations(range(m), k):
            rows = A[list(S)]
            rhs = b[list(S)]
            if A_eq is not None:
                rows = np.vstack([rows, A_eq]) if rows.size else A_eq
                rhs = np.concatenate([rhs, b_eq]) if rhs.size else b_eq
            na = rows.shape[0] if rows.size else 0
            kkt = np.zeros((d + na, d + na))
            kkt[:d, :d] = Q
            if na:
                kkt[:d, d:] = -rows.T
                kkt[d:, :d] = rows
            rhs_full = np.concatenate([-c, rhs if na else np.zeros(0)])
            try:
                sol = np.linalg.solve(kkt, rhs_full)
            except np.linalg.LinAlgError:
                continue
            z, mu = sol[:d], sol[d : d + k]
            if m and np.any(A @ z - b > feas_tol * scale):
                continue
            if k and np.any(mu < -feas_tol):
                continue
            val = 0.5 * z @ Q @ z + c @ z
            if val > best_val:
                best_val, best_z = val, z
    if best_z is None:
        raise UnboundedLP("no validated KKT point (unbounded or degenerate)")
    return best_val, best_z


def _ncr(n, r):
    if r < 0 or r > n:
        return 0
    out = 1
    for i in range(r):
        out = out * (n - i) // (i + 1)
    return out
