"""Projection-type methods for the VI/QVI reformulations, plus a grid oracle.

The VI route treats jointly convex games: iterate x <- proj_X(x - a t) with
t drawn from T(x), declare convergence when the hull residual

    r(x) = min over t in co T(x) of max over vertices v of <t, x - v>

drops below tolerance (a single t must witness all vertices -- that is the
existential quantifier in the VI).  Any point passing this test solves the
VI restricted to the enumerated vertex set exactly, and solving the VI is a
*sufficient* condition for equilibrium; the converse direction is not claimed
and genuinely fails on easy examples.

The QVI route projects blockwise onto the moving sets K_i(x) and measures the
same residual over the current product of constraint vertices.

The grid oracle is the independent ground truth: it enumerates grid nodes
and applies the equilibrium definition directly (feasibility + emptiness of
each player's improvement set), sharing no code path with the residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _lp
from .convexsets import ConvexBody, EmptyBodyError, EnumerationError
from .game import (
    FixedConstraint,
    GameInstance,
    SharedSlice,
    Tolerances,
    constraint_body,
    membership_violation,
    verify_equilibrium,
)
from .operators import OperatorEval, evaluate_T, select
from .preferences import (
    LinearUtility,
    QuadUtility,
    _own_quadratic,
    max_improvement,
)


@dataclass(frozen=True)
class SolverConfig:
    method: str = "projection"  # or "extragradient"
    alpha: float = 0.5
    selection: str = "min_norm_hull"
    max_iters: int = 5000
    residual_tol: float = 1e-6
    step_tol: float = 1e-10
    restarts: int = 8
    seed: int = 0
    trace: bool = False
    residual_every: int = 25
    eps_sat: float = 1e-9

    def to_dict(self):
        return {
            "method": self.method,
            "alpha": self.alpha,
            "selection": self.selection,
            "max_iters": self.max_iters,
            "residual_tol": self.residual_tol,
            "step_tol": self.step_tol,
            "restarts": self.restarts,
            "seed": self.seed,
            "trace": self.trace,
            "residual_every": self.residual_every,
            "eps_sat": self.eps_sat,
        }


@dataclass
class SolveResult:
    point: np.ndarray
    residual: float
    iterations: int
    converged: bool
    restarts_used: int
    problem: str  # "vi" | "qvi"
    certificate: object = None
    trace: Optional[list] = None
    approximate: bool = False

    def to_dict(self):
        return {
            "point": np.asarray(self.point).tolist(),
            "residual": float(self.residual),
            "iterations": self.iterations,
            "converged": bool(self.converged),
            "restarts_used": self.restarts_used,
            "problem": self.problem,
            "approximate": bool(self.approximate),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "trace": self.trace,
        }


# --------------------------------------------------------------------------
# residual


def _whole_block_generators(d):
    """LP-representable under-approximation of the unit ball: co{±e_k}."""
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def hull_residual(op: OperatorEval, x, vertices):
    """(r, t): r = min over t in co T(x) of max_v <t, x - v>, via one LP.

    Whole-space blocks contribute the cross-polytope generators (which is an
    under-approximation containing 0, so convergence claims stay sound).
    Blocks with a zero cone contribute t_i = 0 and no variables.
    """
    x = np.asarray(x, dtype=float)
    V = np.asarray(vertices, dtype=float)
    m = len(V)
    gens, owners = [], []
    for i, cone in enumerate(op.blocks):
        sl = op.block_slice(i)
        if cone.whole_space:
            G = _whole_block_generators(sl.stop - sl.start)
        elif cone.n_generators == 0:
            continue
        else:
            G = cone.generators
        gens.append((i, sl, G))
    if not gens:
        return 0.0, np.zeros(op.dim)

    nvar = sum(len(G) for _, _, G in gens) + 1
    A_ub = np.zeros((m, nvar))
    at = 0
    for i, sl, G in gens:
        # (k, m): <g, x_i - v_i>
        d = (G @ x[sl])[:, None] - G @ V[:, sl].T
        A_ub[:, at : at + len(G)] = d.T
        at += len(G)
    A_ub[:, -1] = -1.0
    b_ub = np.zeros(m)
    A_eq = np.zeros((len(gens), nvar))
    pos = 0
    for r, (_, _, G) in enumerate(gens):
        A_eq[r, pos : pos + len(G)] = 1.0
        pos += len(G)
    b_eq = np.ones(len(gens))
    c = np.zeros(nvar)
    c[-1] = 1.0
    bounds = [(0, None)] * (nvar - 1) + [(None, None)]
    res = _lp.solve_lp(c, A_ub, b_ub, A_eq, b_eq, bounds)
    lam = res.x[:-1]
    t = np.zeros(op.dim)
    pos = 0
    for i, sl, G in gens:
        t[sl] = G.T @ lam[pos : pos + len(G)]
        pos += len(G)
    r_exact = float(np.max((x - V) @ t)) if m else 0.0
    return max(r_exact, 0.0), t


def _residual_prefilter(op: OperatorEval, x, V) -> float:
    """Cheap lower bound: max_v sum_i min_t <t_i, x_i - v_i>."""
    x = np.asarray(x, dtype=float)
    total = np.zeros(len(V))
    for i, cone in enumerate(op.blocks):
        sl = op.block_slice(i)
        W = x[sl][None, :] - V[:, sl]
        if cone.whole_space:
            total -= np.max(np.abs(W), axis=1)
        elif cone.n_generators:
            total += np.min(W @ cone.generators.T, axis=1)
    return float(np.max(total)) if len(V) else 0.0


def residual_with_filter(op, x, V, tol):
    lb = _residual_prefilter(op, x, V)
    if lb > tol:
        return lb, None
    return hull_residual(op, x, V)


# --------------------------------------------------------------------------
# vertex suppliers


_QVI_VERTEX_CAP = 4096


def _body_vertices(body: ConvexBody, rng) -> np.ndarray:
    try:
        vs = body.closure().vertices()
        if len(vs):
            return vs
    except EnumerationError:
        pass
    return body.boundary_samples(rng, 64)


def _product_vertices(bodies, rng):
    per = [_body_vertices(b, rng) for b in bodies]
    total = 1
    for p in per:
        total *= len(p)
    if total > _QVI_VERTEX_CAP:
        # deterministic thinning, block by block
        while total > _QVI_VERTEX_CAP:
            j = int(np.argmax([len(p) for p in per]))
            per[j] = per[j][:: 2]
            total = 1
            for p in per:
                total *= len(p)
    out = per[0]
    for p in per[1:]:
        out = np.hstack(
            [np.repeat(out, len(p), axis=0), np.tile(p, (len(out), 1))]
        )
    return out


# --------------------------------------------------------------------------
# iteration core


def _default_start(game: GameInstance) -> np.ndarray:
    blocks = []
    for pm in game.preferences:
        c = pm.ambient.interior_point()
        if c is None:
            c = pm.ambient.project(np.zeros(pm.block_dim))
        blocks.append(c)
    x0 = game.join(blocks)
    if game.jointly_convex:
        return game.shared_set.project(x0)
    return x0


def _random_start(game: GameInstance, rng) -> np.ndarray:
    blocks = [pm.ambient.sample(rng, 1)[0] for pm in game.preferences]
    x0 = game.join(blocks)
    if game.jointly_convex:
        x0 = game.shared_set.project(x0)
    return x0


def _project_problem(game, x, t, alpha, problem):
    if problem == "vi":
        return game.shared_set.project(x - alpha * t)
    blocks = []
    for i, pm in enumerate(game.preferences):
        target = pm.own(x) - alpha * t[pm.block]
        # a wandering rival profile can empty this player's slice; fall back
        # to the ambient set so the iteration can recover
        try:
            body = constraint_body(game, i, x)
            blocks.append(body.project(target))
        except EmptyBodyError:
            blocks.append(pm.ambient.closure().project(target))
    return game.join(blocks)


def _problem_vertices(game, x, problem, rng):
    """None signals an empty constraint slice (the point is QVI-infeasible)."""
    if problem == "vi":
        return _body_vertices(game.shared_set, rng)
    try:
        bodies = [constraint_body(game, i, x) for i in range(game.n_players)]
        return _product_vertices(bodies, rng)
    except EmptyBodyError:
        return None


def _qvi_feasible(game, x, eps) -> bool:
    for i, pm in enumerate(game.preferences):
        try:
            body = constraint_body(game, i, x)
        except EmptyBodyError:
            return False
        if membership_violation(body, pm.own(x)) > eps:
            return False
    return True


def _run_from(game, x0, config: SolverConfig, problem: str, rng, tol: Tolerances):
    x = np.asarray(x0, dtype=float)
    alpha = config.alpha
    halvings = 0
    best_r, best_x, best_it = np.inf, x.copy(), 0
    trace = [] if config.trace else None
    static_verts = _problem_vertices(game, x, problem, rng) if problem == "vi" else None
    x_prev = None
    approx = False

    def verts(xc):
        return static_verts if problem == "vi" else _problem_vertices(game, xc, problem, rng)

    def probe_residual(op_c, xc):
        V = verts(xc)
        if V is None:
            return np.inf
        r_c, _ = residual_with_filter(op_c, xc, V, config.residual_tol)
        return r_c

    last_probe_r = np.inf
    for k in range(config.max_iters):
        op = evaluate_T(game, x, eps_sat=config.eps_sat, seed=config.seed)
        approx = approx or op.approximate
        t = select(op, config.selection)

        probe = (k % config.residual_every == 0) or np.linalg.norm(t) <= 1e-14
        if probe:
            r = probe_residual(op, x)
            feas_ok = problem == "vi" or _qvi_feasible(game, x, tol.eps_feas)
            if trace is not None:
                trace.append({"iter": k, "residual": float(r), "alpha": alpha})
            if r < best_r and feas_ok:
                best_r, best_x, best_it = r, x.copy(), k
            if r <= config.residual_tol and feas_ok:
                return x, r, k, True, trace, approx
            # normalized directions limit-cycle at radius ~alpha near interior
            # maxima; damp whenever a probe shows no progress
            if k > 0 and r >= last_probe_r - 1e-12:
                alpha *= 0.5
                halvings += 1
                if alpha < 1e-8 or halvings > 60:
                    break
            last_probe_r = r

        if config.method == "extragradient":
            y = _project_problem(game, x, t, alpha, problem)
            op_y = evaluate_T(game, y, eps_sat=config.eps_sat, seed=config.seed)
            t2 = select(op_y, config.selection)
            x_new = _project_problem(game, x, t2, alpha, problem)
        else:
            x_new = _project_problem(game, x, t, alpha, problem)

        step = float(np.linalg.norm(x_new - x))
        cycling = x_prev is not None and np.linalg.norm(x_new - x_prev) <= config.step_tol
        if step <= config.step_tol or cycling:
            r = probe_residual(op, x)
            feas_ok = problem == "vi" or _qvi_feasible(game, x, tol.eps_feas)
            if trace is not None:
                trace.append({"iter": k, "residual": float(r), "alpha": alpha})
            if r < best_r and feas_ok:
                best_r, best_x, best_it = r, x.copy(), k
            if r <= config.residual_tol and feas_ok:
                return x, r, k, True, trace, approx
            # fixed point (or 2-cycle) of this step size that is not a
            # solution: shrink the step and keep going
            alpha *= 0.5
            halvings += 1
            if alpha < 1e-8 or halvings > 60:
                break
        x_prev = x
        x = x_new

    r = probe_residual(op, x)
    feas_ok = problem == "vi" or _qvi_feasible(game, x, tol.eps_feas)
    if r < best_r and feas_ok:
        best_r, best_x, best_it = r, x.copy(), config.max_iters
    return best_x, best_r, best_it, best_r <= config.residual_tol, trace, approx


def _solve(game: GameInstance, config: SolverConfig, problem: str,
           tol: Tolerances) -> SolveResult:
    rng = np.random.default_rng(config.seed)
    starts = [_default_start(game)]
    attempts = max(1, config.restarts)
    best = None
    for attempt in range(attempts):
        x0 = starts[0] if attempt == 0 else _random_start(game, rng)
        x, r, iters, ok, trace, approx = _run_from(game, x0, config, problem, rng, tol)
        cand = SolveResult(x, r, iters, ok, attempt + 1, problem,
                           trace=trace, approximate=approx)
        if best is None or cand.residual < best.residual:
            best = cand
        if ok:
            break
    best.certificate = verify_equilibrium(game, best.point, tol, seed=config.seed)
    return best


def solve_vi(game: GameInstance, config: SolverConfig = SolverConfig(),
             tol: Tolerances = Tolerances()) -> SolveResult:
    """Solve VI(T, shared set) for a jointly convex game."""
    if not game.jointly_convex:
        raise ValueError("solve_vi needs a jointly convex game (shared set)")
    return _solve(game, config, "vi", tol)


def solve_qvi(game: GameInstance, config: SolverConfig = SolverConfig(),
              tol: Tolerances = Tolerances()) -> SolveResult:
    """Solve QVI(T, K): blockwise projections onto the moving constraint sets."""
    return _solve(game, config, "qvi", tol)


def vi_residual(game: GameInstance, x, seed: int = 0, eps_sat: float = 1e-9):
    """(r, t) of the hull residual at x over the shared set's vertices."""
    if not game.jointly_convex:
        raise ValueError("vi_residual needs a jointly convex game")
    rng = np.random.default_rng(seed)
    op = evaluate_T(game, x, eps_sat=eps_sat, seed=seed)
    V = _body_vertices(game.shared_set, rng)
    return hull_residual(op, x, V)


def qvi_residual(game: GameInstance, x, seed: int = 0, eps_sat: float = 1e-9):
    rng = np.random.default_rng(seed)
    op = evaluate_T(game, x, eps_sat=eps_sat, seed=seed)
    V = _problem_vertices(game, np.asarray(x, dtype=float), "qvi", rng)
    if V is None:
        return np.inf, None
    return hull_residual(op, x, V)


# --------------------------------------------------------------------------
# grid oracle


@dataclass
class OracleResult:
    h: float
    nodes_checked: int
    feasible_count: int
    certified: np.ndarray
    improvements: np.ndarray
    disagreements: list
    cross_checked: int

    def to_dict(self):
        return {
            "h": self.h,
            "nodes_checked": self.nodes_checked,
            "feasible_count": self.feasible_count,
            "certified": np.asarray(self.certified).tolist(),
            "improvements": np.asarray(self.improvements).tolist(),
            "disagreements": [
                {"node": np.asarray(n).tolist(), "verifier": bool(v), "oracle": bool(o)}
                for n, v, o in self.disagreements
            ],
            "cross_checked": self.cross_checked,
        }


_ORACLE_NODE_CAP = 2_000_000


def _axis_grid(lo, hi, h):
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise EnumerationError("grid over unbounded range")
    k = int(np.floor((hi - lo) / h + 1e-9))
    vals = lo + h * np.arange(k + 1)
    if hi - vals[-1] > 1e-9:
        vals = np.append(vals, hi)
    return vals


def _simplex_grid(dim, scale, h):
    M = scale / h
    if abs(M - round(M)) > 1e-9:
        M = max(1, round(M))
        h = scale / M
    M = int(round(M))
    nodes = []
    for comp in itertools.product(range(M + 1), repeat=dim - 1):
        s = sum(comp)
        if s <= M:
            nodes.append(tuple(comp) + (M - s,))
    return np.array(nodes, dtype=float) * h


def _block_grid(body: ConvexBody, h: float) -> np.ndarray:
    if body.kind == "simplex":
        return _simplex_grid(body.dim, body.scale, h)
    lo, hi = body.bounding_box()
    axes = [_axis_grid(lo[j], hi[j], h) for j in range(body.dim)]
    total = 1
    for a in axes:
        total *= len(a)
    if total > _ORACLE_NODE_CAP:
        raise EnumerationError(f"block grid too large ({total} nodes)")
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if body.kind == "box":
        return pts
    mask = np.array([body.closure().contains(p, eps=1e-9, eps_open=0.0) for p in pts])
    return pts[mask]


def _feasible_mask(game: GameInstance, nodes: np.ndarray) -> np.ndarray:
    mask = np.ones(len(nodes), dtype=bool)
    for i, (pm, con) in enumerate(zip(game.preferences, game.constraints)):
        if isinstance(con, SharedSlice):
            continue
        blk = nodes[:, pm.block]
        if isinstance(con, FixedConstraint):
            h = con.body.closure().hrep()
            if h is not None:
                A, b, _ = h
                mask &= np.all(blk @ A.T - b <= 1e-9, axis=1)
            C, d = con.body.equalities()
            if len(d):
                mask &= np.all(np.abs(blk @ C.T - d) <= 1e-9, axis=1)
            if h is None:
                mask &= np.array([con.body.contains(z, 1e-9, 0.0) for z in blk])
        else:  # Parametric
            if con.batch_feasible is not None:
                mask &= np.asarray(con.batch_feasible(nodes), dtype=bool)
            else:
                keep = mask.nonzero()[0]
                for idx in keep:
                    body = con.build(nodes[idx])
                    if membership_violation(body, nodes[idx][pm.block]) > 1e-9:
                        mask[idx] = False
    if game.jointly_convex:
        h = game.shared_set.hrep()
        if h is not None:
            A, b, _ = h
            mask &= np.all(nodes @ A.T - b <= 1e-9, axis=1)
            C, d = game.shared_set.equalities()
            if len(d):
                mask &= np.all(np.abs(nodes @ C.T - d) <= 1e-9, axis=1)
        else:
            mask &= np.array(
                [game.shared_set.contains(p, eps=1e-9, eps_open=0.0) for p in nodes]
            )
    return mask


def _rival_groups(nodes: np.ndarray, block: slice):
    """Indices of nodes sharing the same rival profile (off-block columns)."""
    if len(nodes) == 0:
        return []
    rivals = np.delete(nodes, np.arange(block.start, block.stop), axis=1)
    if rivals.shape[1] == 0:
        return [(None, np.arange(len(nodes)))]
    _, inverse = np.unique(np.round(rivals, 12), axis=0, return_inverse=True)
    groups = []
    for g in range(inverse.max() + 1):
        groups.append((g, np.nonzero(inverse == g)[0]))
    return groups


def _batch_support(body: ConvexBody, C: np.ndarray) -> np.ndarray:
    """Row-wise max of <c, z> over z in body for a matrix of objectives."""
    if body.kind == "box":
        return np.where(C >= 0, C * body.hi, C * body.lo).sum(axis=1)
    if body.kind == "simplex":
        return body.scale * C.max(axis=1)
    V = body.closure().vertices()
    if not len(V):
        raise EmptyBodyError("support over empty body")
    return (C @ V.T).max(axis=1)


def _linear_fixed_fast_path(game, pm, con, nodes_f):
    """Vectorized improvements when u is linear in the own block given rivals
    and the constraint body is static: imp = max_K <a1, z> - <a1, x_i>."""
    v = pm.variant
    n = game.n
    if isinstance(v, LinearUtility):
        a1 = np.broadcast_to(v.c[pm.block], (len(nodes_f), pm.block_dim))
    else:
        if np.abs(v.Q[pm.block, pm.block]).max(initial=0.0) > 1e-13:
            return None
        a1 = nodes_f @ v.Q[:, pm.block] + v.c[pm.block]
    M = _batch_support(con.body, np.ascontiguousarray(a1))
    own = nodes_f[:, pm.block]
    return M - np.einsum("kh,kh->k", a1, own)


def _improvements_for_player(game: GameInstance, pm, nodes_f: np.ndarray,
                             tol: Tolerances, seed: int) -> np.ndarray:
    """Exact best-improvement per feasible node, grouped by rival profile."""
    out = np.empty(len(nodes_f))
    graded = isinstance(pm.variant, (LinearUtility, QuadUtility))
    i = pm.player
    con = game.constraints[i]
    if graded and isinstance(con, FixedConstraint) and len(nodes_f):
        try:
            fast = _linear_fixed_fast_path(game, pm, con, nodes_f)
        except (EnumerationError, EmptyBodyError):
            fast = None
        if fast is not None:
            return fast
    for _, idx in _rival_groups(nodes_f, pm.block):
        rep = nodes_f[idx[0]]
        try:
            K = constraint_body(game, i, rep)
        except EmptyBodyError:
            out[idx] = np.inf
            continue
        if graded:
            A2, a1, _ = _own_quadratic(pm, rep)
            h = K.closure().hrep()
            if h is None:
                raise EnumerationError("oracle needs polyhedral constraint slices")
            C, d = K.equalities()
            try:
                M, _ = _lp.max_concave_quad(
                    A2, a1, h[0], h[1], C if len(d) else None, d if len(d) else None
                )
            except _lp.UnboundedLP:
                out[idx] = np.inf
                continue
            Z = nodes_f[idx][:, pm.block]
            vals = 0.5 * np.einsum("kj,jl,kl->k", Z, A2, Z) + Z @ a1
            out[idx] = M - vals
        else:
            for j in idx:
                out[j], _ = max_improvement(pm, nodes_f[j], K, tol.eps_open, seed)
    return out


def grid_oracle(game: GameInstance, h: float, tol: Tolerances = Tolerances(),
                cross_check: bool = True, cross_sample: int = 300,
                seed: int = 0) -> OracleResult:
    """Definition-based equilibrium search on an h-grid.

    Certification is independent of the operator/residual machinery: a node
    passes iff it is feasible and no player can strictly improve within their
    constraint slice (improvements computed by direct maximization).  When
    cross_check is on, every certified node and a sample of rejected ones are
    re-judged by verify_equilibrium and disagreements are reported.
    """
    grids = [_block_grid(pm.ambient, h) for pm in game.preferences]
    total = 1
    for g in grids:
        total *= len(g)
    if total > _ORACLE_NODE_CAP:
        raise EnumerationError(f"joint grid too large ({total} nodes)")
    nodes = grids[0]
    for g in grids[1:]:
        nodes = np.hstack([np.repeat(nodes, len(g), axis=0), np.tile(g, (len(nodes), 1))])
    mask = _feasible_mask(game, nodes)
    nodes_f = nodes[mask]

    imp = np.empty((len(nodes_f), game.n_players))
    for pm in game.preferences:
        imp[:, pm.player] = _improvements_for_player(game, pm, nodes_f, tol, seed)
    ok = np.all(imp <= tol.eps_open, axis=1)
    certified = nodes_f[ok]
    cert_imp = imp[ok]

    disagreements = []
    checked = 0
    if cross_check:
        rng = np.random.default_rng(seed)
        idx_no = np.nonzero(~ok)[0]
        if len(idx_no) > cross_sample:
            idx_no = rng.choice(idx_no, size=cross_sample, replace=False)
        for node, oracle_ok in itertools.chain(
            ((certified[j], True) for j in range(len(certified))),
            ((nodes_f[j], False) for j in idx_no),
        ):
            cert = verify_equilibrium(game, node, tol, seed=seed)
            checked += 1
            if cert.is_equilibrium != oracle_ok:
                disagreements.append((node, cert.is_equilibrium, oracle_ok))

    order = np.lexsort(certified.T[::-1]) if len(certified) else np.array([], dtype=int)
    return OracleResult(
        h=h,
        nodes_checked=int(total),
        feasible_count=int(mask.sum()),
        certified=certified[order],
        improvements=cert_imp[order],
        disagreements=disagreements,
        cross_checked=checked,
    )
