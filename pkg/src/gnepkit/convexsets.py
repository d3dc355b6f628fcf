"""Convex bodies with optional open faces, projections, separation, normal cones.

A body is a convex subset of R^dim given by one of five shapes: axis box,
scaled probability simplex, half-space intersection with a per-row strict
mask, Euclidean ball, or a finite intersection of the above.  Strict rows
carry the open part: ``contains`` demands a margin (default 1e-7) on them,
projection and vertex enumeration always work with the closure.

Membership is monotone in its slack argument: contains(x, e1) implies
contains(x, e2) for e2 >= e1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels, _lp

DEFAULT_EPS_OPEN = 1e-7
EPS_ACTIVE = 1e-8
_VERTEX_DEDUP = 1e-9
_VERTEX_SUBSET_CAP = 200_000


class EmptyBodyError(ValueError):
    """Operation needs a nonempty body (projection targets, anchors...)."""


class InteriorPointError(ValueError):
    """separate() was handed a point in the interior of the body."""


class EnumerationError(ValueError):
    """Vertex enumeration refused: unbounded body or too many row subsets."""


def _as_vec(x, dim=None):
    v = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and v.size != dim:
        raise ValueError(f"expected vector of length {dim}, got {v.size}")
    return v


class ConvexBody:
    """Common interface; concrete shapes are the dataclasses below."""

    dim: int
    kind: str

    # --- membership / geometry -------------------------------------------
    def contains(self, x, eps: float = 0.0, eps_open: float = DEFAULT_EPS_OPEN) -> bool:
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the closure."""
        raise NotImplementedError

    def hrep(self):
        """(A, b, strict) with unit rows, or None when not polyhedral."""
        return None

    def equalities(self):
        """(C, d) rows of known affine equalities (unit rows; may be empty)."""
        return np.zeros((0, self.dim)), np.zeros(0)

    def vertices(self) -> np.ndarray:
        """Vertices of the closure, lexicographically sorted."""
        raise EnumerationError(f"no vertex enumeration for kind={self.kind!r}")

    def bounding_box(self):
        raise NotImplementedError

    def is_bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def is_empty(self, eps_open: float = DEFAULT_EPS_OPEN) -> bool:
        """Whether the body (open faces honored) has no point."""
        return False

    def interior_point(self):
        """Some point with positive margin on every face, or None."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        """k points of the closure (coverage, not uniformity)."""
        raise NotImplementedError

    def closure(self) -> "ConvexBody":
        return self

    def boundary_samples(self, rng: np.random.Generator, k: int) -> np.ndarray:
        pts = self.sample(rng, k)
        c = pts.mean(axis=0)
        out = []
        for p in pts:
            d = p - c
            n = np.linalg.norm(d)
            if n < 1e-12:
                d = rng.standard_normal(self.dim)
                n = np.linalg.norm(d)
            out.append(self.project(c + (d / n) * 1e6))
        return np.array(out)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Box(ConvexBody):
    lo: np.ndarray
    hi: np.ndarray
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_vec(self.lo))
        object.__setattr__(self, "hi", _as_vec(self.hi, self.lo.size))
        if np.any(self.lo > self.hi):
            raise EmptyBodyError("box with lo > hi")

    @property
    def dim(self):
        return self.lo.size

    def contains(self, x, eps=0.0, eps_open=DEFAULT_EPS_OPEN):
        x = _as_vec(x, self.dim)
        return bool(np.all(x >= self.lo - eps) and np.all(x <= self.hi + eps))

    def project(self, x):
        return np.clip(_as_vec(x, self.dim), self.lo, self.hi)

    def hrep(self):
        eye = np.eye(self.dim)
        rows, rhs = [], []
        for j in range(self.dim):
            if np.isfinite(self.hi[j]):
                rows.append(eye[j])
                rhs.append(self.hi[j])
            if np.isfinite(self.lo[j]):
                rows.append(-eye[j])
                rhs.append(-self.lo[j])
        A = np.array(rows).reshape(-1, self.dim)
        b = np.array(rhs)
        return A, b, np.zeros(len(b), dtype=bool)

    def vertices(self):
        if not self.is_bounded():
            raise EnumerationError("unbounded box")
        if self.dim > 12:
            raise EnumerationError("box vertex count over cap")
        cols = [(self.lo[j], self.hi[j]) for j in range(self.dim)]
        vs = np.array(sorted(set(itertools.product(*cols))))
        return vs.reshape(-1, self.dim)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def interior_point(self):
        lo = np.where(np.isfinite(self.lo), self.lo, -1.0)
        hi = np.where(np.isfinite(self.hi), self.hi, lo + 2.0)
        p = 0.5 * (lo + hi)
        return p if np.all(self.hi - self.lo > 0) else None

    def sample(self, rng, k):
        lo = np.where(np.isfinite(self.lo), self.lo, -1e3)
        hi = np.where(np.isfinite(self.hi), self.hi, 1e3)
        return rng.uniform(lo, hi, size=(k, self.dim))

    def to_dict(self):
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class Simplex(ConvexBody):
    """{x >= 0, sum(x) = scale}; the lone lower-dimensional shape here."""

    dim: int
    scale: float = 1.0
    kind: str = field(default="simplex", init=False)

    def __post_init__(self):
        if self.dim < 1 or self.scale <= 0:
            raise ValueError("simplex needs dim >= 1 and scale > 0")

    def contains(self, x, eps=0.0, eps_open=DEFAULT_EPS_OPEN):
        x = _as_vec(x, self.dim)
        slack = eps + 1e-12
        return bool(np.all(x >= -slack) and abs(x.sum() - self.scale) <= slack + 1e-9 * self.scale)

    def project(self, x):
        return _kernels.project_simplex(_as_vec(x, self.dim), self.scale)

    def hrep(self):
        A = -np.eye(self.dim)
        return A, np.zeros(self.dim), np.zeros(self.dim, dtype=bool)

    def equalities(self):
        n = np.ones((1, self.dim)) / np.sqrt(self.dim)
        return n, np.array([self.scale / np.sqrt(self.dim)])

    def vertices(self):
        return self.scale * np.eye(self.dim)

    def bounding_box(self):
        return np.zeros(self.dim), np.full(self.dim, self.scale)

    def interior_point(self):
        if self.dim == 1:
            return np.array([self.scale])
        return np.full(self.dim, self.scale / self.dim)

    def sample(self, rng, k):
        return self.scale * rng.dirichlet(np.ones(self.dim), size=k)

    def to_dict(self):
        return {"kind": "simplex", "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True)
class HPoly(ConvexBody):
    """{x : A x <= b}, rows unit-normalized at construction; strict rows open."""

    A: np.ndarray
    b: np.ndarray
    strict: np.ndarray = None
    kind: str = field(default="hpoly", init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = _as_vec(self.b, A.shape[0])
        strict = (
            np.zeros(A.shape[0], dtype=bool)
            if self.strict is None
            else np.asarray(self.strict, dtype=bool).reshape(A.shape[0])
        )
        norms = np.linalg.norm(A, axis=1)
        keep = norms > 1e-13
        # zero rows are vacuous (b >= 0) or poison the whole body (b < 0)
        degenerate = ~keep & ((b < -1e-13) | (strict & (b <= 1e-13)))
        A, b, strict, norms = A[keep], b[keep], strict[keep], norms[keep]
        # rows already at unit norm stay bit-identical (save/load idempotence)
        norms = np.where(np.abs(norms - 1.0) <= 1e-12, 1.0, norms)
        object.__setattr__(self, "A", A / norms[:, None])
        object.__setattr__(self, "b", b / norms)
        object.__setattr__(self, "strict", strict)
        object.__setattr__(self, "_poisoned", bool(degenerate.any()))
        if A.shape[0] == 0 and not self._poisoned:
            raise ValueError("HPoly needs at least one nontrivial row")

    @property
    def dim(self):
        return self.A.shape[1]

    def margins(self, x):
        return self.A @ _as_vec(x, self.dim) - self.b

    def contains(self, x, eps=0.0, eps_open=DEFAULT_EPS_OPEN):
        if self._poisoned:
            return False
        m = self.margins(x)
        lim = np.where(self.strict, eps - eps_open, eps)
        return bool(np.all(m <= lim + 1e-12))

    @cached_property
    def _chebyshev(self):
        try:
            return _lp.chebyshev_center(self.A, self.b)
        except _lp.InfeasibleLP:
            return None

    def is_empty(self, eps_open=DEFAULT_EPS_OPEN):
        if self._poisoned or self._chebyshev is None:
            return True
        if not self.strict.any():
            return False
        s, _ = _lp.max_slack(self.A, self.b, self.strict)
        return s <= eps_open

    def project(self, x):
        x = _as_vec(x, self.dim)
        if self._poisoned:
            raise EmptyBodyError("projection onto empty polyhedron")
        m = self.margins(x)
        if m.max(initial=-np.inf) <= 0.0:
            return x.copy()
        p = _kernels.dykstra_halfspaces(self.A, self.b, x)
        p = _polish_projection(self.A, self.b, x, p)
        # only consult the (cached) feasibility LP when the sweeps failed,
        # so the solver hot path stays LP-free
        if self.margins(p).max() > 1e-7 and self._chebyshev is None:
            raise EmptyBodyError("projection onto empty polyhedron")
        return p

    def hrep(self):
        return self.A.copy(), self.b.copy(), self.strict.copy()

    @cached_property
    def _bbox(self):
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            try:
                hi[j] = _lp.max_linear(e, self.A, self.b)[0]
            except _lp.UnboundedLP:
                hi[j] = np.inf
            try:
                lo[j] = -_lp.max_linear(-e, self.A, self.b)[0]
            except _lp.UnboundedLP:
                lo[j] = -np.inf
        return lo, hi

    def bounding_box(self):
        if self._chebyshev is None:
            raise EmptyBodyError("bounding box of empty polyhedron")
        lo, hi = self._bbox
        return lo.copy(), hi.copy()

    @cached_property
    def _vertices(self):
        if not self.is_bounded():
            raise EnumerationError("vertex enumeration of unbounded polyhedron")
        return _enumerate_vertices(self.A, self.b)

    def vertices(self):
        if self._chebyshev is None:
            return np.zeros((0, self.dim))
        return self._vertices.copy()

    def interior_point(self):
        if self._chebyshev is None:
            return None
        x, r = self._chebyshev
        return x if r > 1e-9 else None

    def sample(self, rng, k):
        if self._chebyshev is None:
            raise EmptyBodyError("sampling an empty polyhedron")
        vs = self.vertices() if self.is_bounded() else None
        if vs is not None and len(vs):
            w = rng.dirichlet(np.ones(len(vs)), size=k)
            return w @ vs
        x, r = self._chebyshev
        return x + rng.standard_normal((k, self.dim)) * max(r, 1e-3)

    def closure(self):
        if not self.strict.any():
            return self
        return HPoly(self.A, self.b, None)

    def to_dict(self):
        return {
            "kind": "hpoly",
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "strict": self.strict.astype(int).tolist(),
        }


@dataclass(frozen=True)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float
    kind: str = field(default="ball", init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec(self.center))
        if self.radius < 0:
            raise EmptyBodyError("negative radius")

    @property
    def dim(self):
        return self.center.size

    def contains(self, x, eps=0.0, eps_open=DEFAULT_EPS_OPEN):
        return bool(np.linalg.norm(_as_vec(x, self.dim) - self.center) <= self.radius + eps)

    def project(self, x):
        x = _as_vec(x, self.dim)
        d = x - self.center
        n = np.linalg.norm(d)
        if n <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / n)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def interior_point(self):
        return self.center.copy() if self.radius > 0 else None

    def sample(self, rng, k):
        g = rng.standard_normal((k, self.dim))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-12)
        r = self.radius * rng.uniform(0, 1, size=(k, 1)) ** (1.0 / self.dim)
        return self.center + g * r

    def boundary_samples(self, rng, k):
        g = rng.standard_normal((k, self.dim))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-12)
        return self.center + self.radius * g

    def to_dict(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class Intersection(ConvexBody):
    parts: tuple
    kind: str = field(default="intersection", init=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("empty intersection")
        if len({p.dim for p in parts}) != 1:
            raise ValueError("intersection parts disagree on dim")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    @cached_property
    def _merged(self):
        """Single HPoly when every part is polyhedral, else None."""
        rows, rhs, strict = [], [], []
        for p in self.parts:
            h = p.hrep()
            if h is None:
                return None
            rows.append(h[0])
            rhs.append(h[1])
            strict.append(h[2])
            C, d = p.equalities()
            if len(d):
                rows.extend([C, -C])
                rhs.extend([d, -d])
                strict.extend([np.zeros(len(d), bool)] * 2)
        return HPoly(np.vstack(rows), np.concatenate(rhs), np.concatenate(strict))

    def contains(self, x, eps=0.0, eps_open=DEFAULT_EPS_OPEN):
        return all(p.contains(x, eps, eps_open) for p in self.parts)

    def project(self, x):
        if self._merged is not None:
            return self._merged.project(x)
        return _dykstra_bodies(self.parts, _as_vec(x, self.dim))

    def hrep(self):
        if self._merged is None:
            return None
        return self._merged.hrep()

    def equalities(self):
        Cs = [p.equalities() for p in self.parts]
        C = np.vstack([c for c, _ in Cs])
        d = np.concatenate([v for _, v in Cs])
        return C, d

    def is_empty(self, eps_open=DEFAULT_EPS_OPEN):
        if self._merged is not None:
            return self._merged.is_empty(eps_open)
        probe = self.project(np.zeros(self.dim))
        return not self.contains(probe, eps=1e-7, eps_open=0.0)

    def vertices(self):
        if self._merged is None:
            raise EnumerationError("vertex enumeration with non-polyhedral part")
        return self._merged.vertices()

    def bounding_box(self):
        if self._merged is not None:
            return self._merged.bounding_box()
        los, his = zip(*(p.bounding_box() for p in self.parts))
        return np.max(los, axis=0), np.min(his, axis=0)

    def interior_point(self):
        if self._merged is not None:
            return self._merged.interior_point()
        centers = [q.interior_point() for q in self.parts]
        if any(c is None for c in centers):
            return None
        p = self.project(np.mean(centers, axis=0))
        ok = all(q.contains(p, eps=-1e-9, eps_open=0.0) for q in self.parts)
        return p if ok else None

    def sample(self, rng, k):
        if self._merged is not None:
            return self._merged.sample(rng, k)
        lo, hi = self.bounding_box()
        out, tries = [], 0
        while len(out) < k and tries < 200 * k:
            cand = rng.uniform(lo, hi)
            tries += 1
            if self.contains(cand, eps=0.0, eps_open=0.0):
                out.append(cand)
        while len(out) < k:
            out.append(self.project(rng.uniform(lo, hi)))
        return np.array(out)

    def closure(self):
        return Intersection(tuple(p.closure() for p in self.parts))

    def to_dict(self):
        return {"kind": "intersection", "parts": [p.to_dict() for p in self.parts]}


# --------------------------------------------------------------------------
# constructors


def box(lo, hi) -> Box:
    return Box(lo, hi)


def simplex(dim: int, scale: float = 1.0) -> Simplex:
    return Simplex(dim, scale)


def halfspaces(A, b, strict=None) -> HPoly:
    return HPoly(A, b, strict)


def ball(center, radius: float) -> Ball:
    return Ball(center, radius)


def intersect(*parts) -> Intersection:
    return Intersection(tuple(parts))


_KINDS = {"box": Box, "simplex": Simplex, "hpoly": HPoly, "ball": Ball}


def body_from_dict(d: dict) -> ConvexBody:
    kind = d["kind"]
    if kind == "box":
        return Box(d["lo"], d["hi"])
    if kind == "simplex":
        return Simplex(int(d["dim"]), float(d["scale"]))
    if kind == "hpoly":
        return HPoly(d["A"], d["b"], np.array(d["strict"], dtype=bool))
    if kind == "ball":
        return Ball(d["center"], float(d["radius"]))
    if kind == "intersection":
        return Intersection(tuple(body_from_dict(p) for p in d["parts"]))
    raise ValueError(f"unknown body kind {kind!r}")


# --------------------------------------------------------------------------
# projection helpers


def _polish_projection(A, b, x, p, tol=1e-9):
    """Refine a Dykstra output by exact projection onto its active face."""
    act = (A @ p - b) >= -1e-7
    if not act.any():
        return p
    A_act = A[act]
    try:
        lam = np.linalg.lstsq(A_act @ A_act.T, A_act @ x - b[act], rcond=None)[0]
    except np.linalg.LinAlgError:
        return p
    cand = x - A_act.T @ lam
    if np.all(lam >= -tol) and np.all(A @ cand - b <= tol):
        return cand
    return p


def _dykstra_bodies(parts, y, max_sweeps=10_000, tol=1e-10):
    """Dykstra across arbitrary bodies using their exact projections."""
    x = y.copy()
    corr = [np.zeros_like(y) for _ in parts]
    for _ in range(max_sweeps):
        x_prev = x.copy()
        for i, p in enumerate(parts):
            w = x + corr[i]
            x = p.project(w)
            corr[i] = w - x
        if np.max(np.abs(x - x_prev)) <= 1e-2 * tol + 1e-15:
            break
    return x


def _enumerate_vertices(A, b, feas_tol=1e-8):
    m, n = A.shape
    if _lp._ncr(m, n) > _VERTEX_SUBSET_CAP:
        raise EnumerationError(f"too many row subsets ({m} choose {n})")
    out = []
    for S in itertools.combinations(range(m), n):
        sub = A[list(S)]
        try:
            v = np.linalg.solve(sub, b[list(S)])
        except np.linalg.LinAlgError:
            continue
        if np.all(A @ v - b <= feas_tol * (1.0 + np.abs(b))):
            out.append(v)
    if not out:
        return np.zeros((0, n))
    vs = np.array(out)
    vs = vs[np.lexsort(vs.T[::-1])]
    keep = [0]
    for i in range(1, len(vs)):
        if np.linalg.norm(vs[i] - vs[keep[-1]]) > _VERTEX_DEDUP:
            keep.append(i)
    # lexsort can leave equal vertices non-adjacent only with exact ties; a
    # final pairwise pass is cheap at these sizes
    vs = vs[keep]
    uniq = []
    for v in vs:
        if all(np.linalg.norm(v - u) > _VERTEX_DEDUP for u in uniq):
            uniq.append(v)
    return np.array(uniq)


# --------------------------------------------------------------------------
# separation and normal cones


@dataclass(frozen=True)
class ConeSection:
    """Unit generators of (normal cone) ∩ (unit ball); co of them downstream.

    whole_space encodes N = R^dim (empty body convention).  An empty
    generator list with whole_space False is the zero cone.
    """

    dim: int
    generators: np.ndarray
    whole_space: bool = False
    approximate: bool = False

    @staticmethod
    def whole(dim: int) -> "ConeSection":
        return ConeSection(dim, np.zeros((0, dim)), whole_space=True)

    @staticmethod
    def zero(dim: int) -> "ConeSection":
        return ConeSection(dim, np.zeros((0, dim)))

    @staticmethod
    def from_vectors(vs, dim: int, approximate: bool = False) -> "ConeSection":
        arr = np.asarray(vs, dtype=float).reshape(-1, dim)
        out = []
        for v in arr:
            n = np.linalg.norm(v)
            if n < 1e-12:
                continue
            u = v / n
            if all(abs(u @ w - 1.0) > 1e-12 for w in out):
                out.append(u)
        return ConeSection(dim, np.array(out).reshape(-1, dim), approximate=approximate)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def min_norm_point(self) -> np.ndarray:
        """Min-norm point of co(generators); 0 for whole_space or zero cone."""
        if self.whole_space or self.n_generators == 0:
            return np.zeros(self.dim)
        return _min_norm_hull_point(self.generators)

    def support_min(self, d: np.ndarray) -> float:
        """min over generators of <g, d>; +inf convention for empty list."""
        if self.n_generators == 0:
            return 0.0
        return float(np.min(self.generators @ d))

    def to_dict(self):
        return {
            "dim": self.dim,
            "generators": np.asarray(self.generators).tolist(),
            "whole_space": bool(self.whole_space),
            "approximate": bool(self.approximate),
        }


def _min_norm_hull_point(G, tol=1e-10):
    """Exact min-norm point of co(rows of G) by support enumeration (Wolfe)."""
    k, n = G.shape
    best, best_norm = G[0], np.linalg.norm(G[0])
    for size in range(1, min(k, n + 1) + 1):
        for S in itertools.combinations(range(k), size):
            Gs = G[list(S)]
            M = np.zeros((size + 1, size + 1))
            M[:size, :size] = Gs @ Gs.T
            M[:size, size] = -1.0
            M[size, :size] = 1.0
            rhs = np.zeros(size + 1)
            rhs[size] = 1.0
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                continue
            lam = sol[:size]
            if np.any(lam < -1e-12):
                continue
            p = Gs.T @ lam
            # Wolfe optimality over the full generator set
            if np.all(G @ p >= p @ p - tol):
                nn = np.linalg.norm(p)
                if nn < best_norm - 1e-15:
                    best, best_norm = p, nn
                if nn <= tol:
                    return p
    return best


def separate(body: ConvexBody, y, eps_act: float = EPS_ACTIVE):
    """A unit functional y* with <y*, z - y> <= 0 for all z in cl(body).

    Exterior points get the normalized projection residual; boundary points
    get the average of active face normals (any single active normal when
    opposite equality normals cancel the average).  Interior points raise.
    """
    y = _as_vec(y, body.dim)
    p = body.project(y)
    r = y - p
    rn = np.linalg.norm(r)
    if rn > 1e-9:
        return r / rn
    gens = _active_normals(body, p, eps_act)
    if not len(gens):
        raise InteriorPointError("separate() needs y outside the interior")
    avg = np.mean(gens, axis=0)
    n = np.linalg.norm(avg)
    if n > 1e-9:
        return avg / n
    return gens[0]


def _active_normals(body: ConvexBody, p, eps_act):
    """Unit outward normals of faces active at feasible point p."""
    out = []
    h = body.hrep()
    if h is not None:
        A, b, _ = h
        m = A @ p - b
        for i in range(len(b)):
            if m[i] >= -eps_act * (1.0 + abs(b[i])):
                out.append(A[i])
    C, d = body.equalities()
    for i in range(len(d)):
        out.append(C[i])
        out.append(-C[i])
    if isinstance(body, Ball):
        r = np.linalg.norm(p - body.center)
        if r >= body.radius - eps_act * (1.0 + body.radius) and r > 1e-12:
            out.append((p - body.center) / r)
    if isinstance(body, Intersection) and body._merged is None:
        for part in body.parts:
            if part.hrep() is None and not isinstance(part, Ball):
                continue
            out.extend(_active_normals(part, p, eps_act))
        # deduplicate handled by caller via ConeSection
    return np.array(out).reshape(-1, body.dim)


def normal_cone_generators(body: ConvexBody, y, eps_act: float = EPS_ACTIVE) -> ConeSection:
    """Unit generators of N_body(y) ∩ S[0,1] (convex hull taken downstream).

    Empty body -> whole space (the convention that makes satiated players
    trivially stationary).  Interior y -> zero cone.  Exterior y -> the
    projection residual plus those active-face normals that form an acute
    angle with it; when vertices are enumerable each generator is verified
    against them and violators are dropped.
    """
    if body.is_empty(eps_open=0.0):
        return ConeSection.whole(body.dim)
    y = _as_vec(y, body.dim)
    p = body.project(y)
    r = y - p
    rn = np.linalg.norm(r)
    actives = _active_normals(body, p, eps_act)
    if rn <= 1e-9:
        return ConeSection.from_vectors(actives, body.dim)
    rhat = r / rn
    gens = [rhat]
    for a in actives:
        if a @ rhat >= -1e-9:
            gens.append(a)
    gens = np.array(gens)
    try:
        vs = body.closure().vertices()
    except (EnumerationError, NotImplementedError):
        vs = None
    if vs is not None and len(vs):
        ok = [g for g in gens if np.max(vs @ g) - g @ y <= 1e-8]
        gens = np.array(ok) if ok else gens[:1]
    return ConeSection.from_vectors(gens, body.dim)


def polar_check(cone: ConeSection, d, tol: float = 1e-9) -> bool:
    """Is d in the polar of the cone spanned by the section?"""
    d = _as_vec(d, cone.dim)
    if cone.whole_space:
        return bool(np.linalg.norm(d) <= tol)
    if cone.n_generators == 0:
        return True
    return bool(np.max(cone.generators @ d) <= tol)


def project(body: ConvexBody, y) -> np.ndarray:
    return body.project(y)


def support_max(body: ConvexBody, c) -> float:
    """max over the closure of <c, z>; raises UnboundedLP when unbounded."""
    c = _as_vec(c, body.dim)
    if isinstance(body, Box):
        lo, hi = body.lo, body.hi
        val = np.sum(np.where(c >= 0, c * hi, c * lo))
        if not np.isfinite(val):
            raise _lp.UnboundedLP("support of unbounded box")
        return float(val)
    if isinstance(body, Simplex):
        return float(body.scale * np.max(c))
    if isinstance(body, Ball):
        return float(c @ body.center + body.radius * np.linalg.norm(c))
    h = body.hrep()
    if h is None:
        raise ValueError(f"support_max unsupported for kind={body.kind!r}")
    C, d = body.equalities()
    val, _ = _lp.max_linear(c, h[0], h[1], C if len(d) else None, d if len(d) else None)
    return float(val)


def hull_body(points: np.ndarray) -> ConvexBody:
    """Convex hull of finitely many points as a closed body.

    Full-dimensional hulls go through qhull; 1-d (segment) hulls are built
    directly so degenerate unions stay usable in any ambient dimension.
    """
    pts = np.asarray(points, dtype=float).reshape(len(points), -1)
    dim = pts.shape[1]
    if dim == 1:
        return Box([pts.min()], [pts.max()])
    center = pts.mean(axis=0)
    U, s, Vt = np.linalg.svd(pts - center, full_matrices=True)
    rank = int(np.sum(s > 1e-9 * max(1.0, s[0] if len(s) else 0.0)))
    if rank >= 2 and rank == dim:
        from scipy.spatial import ConvexHull

        eq = ConvexHull(pts).equations
        return HPoly(eq[:, :-1], -eq[:, -1])
    if rank == 0:
        p = pts[0]
        return Box(p, p)
    if rank == 1:
        u = Vt[0]
        t = (pts - center) @ u
        rows = [u, -u]
        rhs = [center @ u + t.max(), -(center @ u + t.min())]
        for j in range(1, dim):
            v = Vt[j]
            rows.extend([v, -v])
            rhs.extend([center @ v, -(center @ v)])
        return HPoly(np.array(rows), np.array(rhs))
    raise EnumerationError("hull of points lower-dimensional but rank >= 2")
