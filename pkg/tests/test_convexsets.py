"""Bodies, membership, projection, separation, and normal cones.

The separation/normal-cone checks deliberately use a projection-based oracle
(g is a normal at y iff project(y + delta*g) returns y) so the geometric
routines are judged by independent machinery.
"""

import numpy as np
import pytest

from gnepkit.convexsets import (
    Ball,
    Box,
    ConeSection,
    EmptyBodyError,
    HPoly,
    Intersection,
    InteriorPointError,
    Simplex,
    hull_body,
    normal_cone_generators,
    polar_check,
    separate,
    support_max,
)

SQ2 = np.sqrt(2.0)


def unit_square():
    return Box([0.0, 0.0], [1.0, 1.0])


def triangle():
    # {x >= 0, x1 + x2 <= 1}
    return HPoly([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])


# -- membership ------------------------------------------------------------


def test_box_membership_and_projection():
    B = unit_square()
    assert B.contains([0.5, 0.5])
    assert not B.contains([1.5, 0.5])
    assert np.allclose(B.project([2.0, -1.0]), [1.0, 0.0])


def test_membership_monotone_in_slack(rng):
    B = triangle()
    for _ in range(100):
        x = rng.uniform(-0.3, 1.3, 2)
        for e1, e2 in [(0.0, 1e-6), (1e-8, 1e-4)]:
            if B.contains(x, eps=e1):
                assert B.contains(x, eps=e2)


def test_strict_rows_demand_margin():
    # open upper halfplane of the square: {x in [0,1]^2 : x2 > 0.5}
    P = HPoly([[1.0, 0], [-1, 0], [0, 1], [0, -1]], [1.0, 0, 1, -0.5],
              strict=np.array([False, False, False, True]))
    assert P.contains([0.5, 0.7])
    assert not P.contains([0.5, 0.5])          # on the open face
    assert not P.contains([0.5, 0.5 + 1e-9])   # inside closure, below margin
    assert P.closure().contains([0.5, 0.5])


def test_simplex_kind_and_projection(rng):
    S = Simplex(3, scale=2.0)
    z = S.project(rng.uniform(-1, 3, 3))
    assert z.sum() == pytest.approx(2.0, abs=1e-9)
    assert z.min() >= -1e-12
    assert S.contains([1.0, 0.5, 0.5])
    assert not S.contains([2.0, 0.5, -0.5])


def test_ball_projection():
    B = Ball(center=[1.0, 0.0], radius=0.5)
    assert np.allclose(B.project([3.0, 0.0]), [1.5, 0.0])
    assert B.contains([1.2, 0.1])


def test_hpoly_projection_matches_exact(rng):
    # random bounded polyhedra: Dykstra + polish vs exact QP enumeration
    from gnepkit import _lp

    for _ in range(30):
        d = int(rng.integers(1, 4))
        A = rng.standard_normal((int(rng.integers(d + 2, d + 6)), d))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        b = A @ rng.uniform(-0.3, 0.3, d) + rng.uniform(0.2, 1.0, len(A))
        P = HPoly(A, b)
        y = rng.standard_normal(d) * 2
        z = P.project(y)
        _, z_exact = _lp.max_concave_quad(-np.eye(d), y, A, b)
        assert np.allclose(z, z_exact, atol=1e-6)


def test_intersection_merges_polyhedral_parts():
    I = Intersection((unit_square(), HPoly([[1.0, 1.0]], [1.0])))
    assert I.contains([0.2, 0.2])
    assert not I.contains([0.9, 0.9])
    z = I.project([1.0, 1.0])
    assert np.allclose(z, [0.5, 0.5], atol=1e-7)


def test_empty_intersection_detected():
    I = Intersection((Box([0.0], [1.0]), Box([2.0], [3.0])))
    assert I.is_empty()
    with pytest.raises(EmptyBodyError):
        I.project(np.array([0.5]))


# -- vertices / hulls / support --------------------------------------------


def test_vertices_triangle():
    V = triangle().vertices()
    want = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    assert V.shape == (3, 2)
    for w in want:
        assert np.min(np.abs(V - w).sum(axis=1)) < 1e-9


def test_hull_body_square(rng):
    pts = np.array([[0.0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]])
    H = hull_body(pts)
    assert H.contains([0.5, 0.25])
    assert not H.contains([1.2, 0.5])


def test_hull_body_degenerate_segment():
    H = hull_body(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]))
    assert H.contains([0.5, 0.5, 0.0])
    assert not H.contains([0.5, 0.4, 0.0])
    assert not H.contains([0.5, 0.5, 0.1])


def test_hull_body_interval_1d():
    H = hull_body(np.array([[2.0], [-1.0], [0.5]]))
    assert H.contains([0.0]) and H.contains([2.0]) and not H.contains([2.1])


@pytest.mark.parametrize("body,c,want", [
    (unit_square(), [1.0, 2.0], 3.0),
    (unit_square(), [-1.0, 2.0], 2.0),
    (Simplex(3), [1.0, 5.0, 2.0], 5.0),
    (Ball([0.0, 0.0], 2.0), [3.0, 4.0], 10.0),
])
def test_support_max_closed_forms(body, c, want):
    assert support_max(body, np.array(c)) == pytest.approx(want, abs=1e-9)


def test_support_max_matches_vertex_scan(rng):
    P = triangle()
    V = P.vertices()
    for _ in range(25):
        c = rng.standard_normal(2)
        assert support_max(P, c) == pytest.approx((V @ c).max(), abs=1e-8)


# -- separation -------------------------------------------------------------


def test_separate_box_corner_frozen():
    # at the (1,1) corner of the unit square the mean of the active outward
    # normals is (1,1)/sqrt(2)
    t = separate(unit_square(), np.array([1.0, 1.0]))
    assert np.allclose(t, [1 / SQ2, 1 / SQ2], atol=1e-9)


def test_separate_exterior_residual_direction():
    t = separate(unit_square(), np.array([2.0, 0.5]))
    assert np.allclose(t, [1.0, 0.0], atol=1e-9)


def test_separate_interior_raises():
    with pytest.raises(InteriorPointError):
        separate(unit_square(), np.array([0.5, 0.5]))


def test_separate_open_halfspace_boundary():
    # open preference set {z : 3 z1 + 4 z2 < 7}; anchor on its boundary
    P = HPoly([[3.0, 4.0]], [7.0], strict=np.array([True]))
    y = np.array([1.0, 1.0])
    t = separate(P, y)
    assert np.allclose(t, [0.6, 0.8], atol=1e-9)
    # members satisfy <t, z - y> < 0 strictly
    for z in [np.array([0.0, 0.0]), np.array([1.0, 0.9]), np.array([-2.0, 3.0])]:
        assert t @ (z - y) < 0


def test_separation_inequality_on_random_polytopes(rng):
    for _ in range(60):
        dim = int(rng.integers(1, 5))
        pts = rng.uniform(-1, 1, size=(dim + 2, dim))
        try:
            body = hull_body(pts)
        except Exception:
            continue
        V = body.closure().vertices()
        if not len(V):
            continue
        y = V[rng.integers(len(V))]
        t = separate(body, y)
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-9)
        assert (V @ t - t @ y).max() <= 1e-8


# -- normal cones ------------------------------------------------------------


def _is_normal_direction(body, y, g, delta=1e-6):
    """Projection oracle: g is normal at y iff stepping out along g projects
    straight back to y."""
    z = body.project(y + delta * g)
    return np.linalg.norm(z - y) <= 10 * delta * 1e-2 + 1e-9


def test_normal_cone_box_corner():
    gens = normal_cone_generators(unit_square(), np.array([1.0, 1.0]))
    assert not gens.whole_space
    G = gens.generators
    assert len(G) == 2
    for e in np.eye(2):
        assert np.min(np.abs(G - e).sum(axis=1)) < 1e-9


def test_normal_cone_empty_body_is_whole_space():
    empty = HPoly([[1.0], [-1.0]], [0.0, -1.0])
    gens = normal_cone_generators(empty, np.array([0.3]))
    assert gens.whole_space


def test_normal_cone_interior_is_zero():
    gens = normal_cone_generators(unit_square(), np.array([0.4, 0.6]))
    assert not gens.whole_space
    assert len(gens.generators) == 0


def test_normal_cone_generators_pass_projection_oracle(rng):
    for _ in range(40):
        dim = int(rng.integers(1, 4))
        pts = rng.uniform(-1, 1, size=(dim + 2, dim))
        try:
            body = hull_body(pts)
        except Exception:
            continue
        V = body.closure().vertices()
        if not len(V):
            continue
        anchor = V[rng.integers(len(V))]
        gens = normal_cone_generators(body, anchor)
        assert not gens.whole_space
        for g in gens.generators:
            assert _is_normal_direction(body, anchor, g), (anchor, g)


def test_normal_cone_exterior_contains_residual(rng):
    body = triangle()
    y = np.array([1.0, 1.0])
    gens = normal_cone_generators(body, y)
    r = y - body.project(y)
    r /= np.linalg.norm(r)
    assert any(np.allclose(g, r, atol=1e-8) for g in gens.generators)


# -- cone sections -----------------------------------------------------------


def test_cone_from_vectors_normalizes_and_dedupes():
    C = ConeSection.from_vectors([[2.0, 0.0], [1.0, 0.0], [0.0, 3.0]], 2)
    assert len(C.generators) == 2
    assert np.allclose(np.linalg.norm(C.generators, axis=1), 1.0)


def test_min_norm_point_frozen():
    C = ConeSection.from_vectors([[1.0, 0.0], [0.0, 1.0]], 2)
    assert np.allclose(C.min_norm_point(), [0.5, 0.5], atol=1e-9)


def test_min_norm_point_wolfe_condition(rng):
    for _ in range(30):
        d = int(rng.integers(1, 4))
        G = rng.standard_normal((int(rng.integers(1, 5)), d))
        C = ConeSection.from_vectors(G, d)
        if not len(C.generators):
            continue
        p = C.min_norm_point()
        # optimality of the hull point: <g, p> >= |p|^2 for every generator
        assert np.all(C.generators @ p >= p @ p - 1e-7)


def test_polar_check():
    C = ConeSection.from_vectors([[1.0, 0.0]], 2)
    assert polar_check(C, np.array([-1.0, 0.0]))
    assert polar_check(C, np.array([0.0, 1.0]))     # orthogonal is fine
    assert not polar_check(C, np.array([1.0, 0.0]))
    W = ConeSection.whole(2)
    assert polar_check(W, np.zeros(2))
    assert not polar_check(W, np.array([1e-3, 0.0]))
