import numpy as np
import pytest

from gnepkit import _lp


def test_max_linear_square():
    # max x + 2y over [0,1]^2 -> 3 at (1,1)
    A = np.array([[1.0, 0], [0, 1], [-1, 0], [0, -1]])
    b = np.array([1.0, 1, 0, 0])
    val, x = _lp.max_linear(np.array([1.0, 2.0]), A, b)
    assert val == pytest.approx(3.0, abs=1e-9)
    assert np.allclose(x, [1, 1], atol=1e-9)


def test_infeasible_raises():
    A = np.array([[1.0], [-1.0]])
    b = np.array([0.0, -1.0])  # x <= 0 and x >= 1
    with pytest.raises(_lp.InfeasibleLP):
        _lp.max_linear(np.array([1.0]), A, b)


def test_unbounded_raises():
    with pytest.raises(_lp.UnboundedLP):
        _lp.max_linear(np.array([1.0]), np.array([[-1.0]]), np.array([0.0]))


def test_max_slack_unit_square():
    # deepest interior point of [0,1]^2 when all rows strict: margin 1/2
    A = np.array([[1.0, 0], [0, 1], [-1, 0], [0, -1]])
    b = np.array([1.0, 1, 0, 0])
    strict = np.ones(4, dtype=bool)
    s, x = _lp.max_slack(A, b, strict)
    assert s == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(x, [0.5, 0.5], atol=1e-8)


def test_chebyshev_center_square():
    A = np.array([[1.0, 0], [0, 1], [-1, 0], [0, -1]])
    b = np.array([1.0, 1, 0, 0])
    x, r = _lp.chebyshev_center(A, b)
    assert r == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(x, [0.5, 0.5], atol=1e-8)


def _quad_grid_oracle(Q, c, A, b, lo=-2.0, hi=2.0, steps=241):
    """Dense grid argmax; only used to validate the exact KKT enumeration."""
    d = len(c)
    axes = [np.linspace(lo, hi, steps)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    Z = np.stack([m.ravel() for m in mesh], axis=1)
    feas = np.all(Z @ A.T - b <= 1e-9, axis=1)
    Z = Z[feas]
    vals = 0.5 * np.einsum("ki,ij,kj->k", Z, Q, Z) + Z @ c
    j = vals.argmax()
    return vals[j], Z[j]


def test_max_concave_quad_interior_max():
    # max -(x-0.3)^2 - (y+0.2)^2 over [-1,1]^2
    Q = -2.0 * np.eye(2)
    c = np.array([0.6, -0.4])
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.ones(4)
    val, x = _lp.max_concave_quad(Q, c, A, b)
    assert np.allclose(x, [0.3, -0.2], atol=1e-9)
    assert val == pytest.approx(0.5 * x @ Q @ x + c @ x, abs=1e-12)


def test_max_concave_quad_matches_grid(rng):
    for _ in range(20):
        d = int(rng.integers(1, 3))
        G = rng.standard_normal((d, d))
        Q = -(G @ G.T) - 0.2 * np.eye(d)
        c = rng.uniform(-1, 1, d)
        A = np.vstack([np.eye(d), -np.eye(d), rng.standard_normal((1, d))])
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        b = np.concatenate([np.full(2 * d, 1.5), [1.0]])
        val, x = _lp.max_concave_quad(Q, c, A, b)
        gval, _ = _quad_grid_oracle(Q, c, A, b)
        assert val >= gval - 1e-6        # exact beats any grid point
        assert np.all(A @ x - b <= 1e-7)  # and stays feasible


def test_max_concave_quad_with_equality():
    # max -(x^2 + y^2) on the line x + y = 1 inside the square -> (0.5, 0.5)
    Q = -2.0 * np.eye(2)
    c = np.zeros(2)
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.ones(4)
    val, x = _lp.max_concave_quad(Q, c, A, b,
                                  A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([1.0]))
    assert np.allclose(x, [0.5, 0.5], atol=1e-9)


def test_max_concave_quad_unbounded_linear():
    with pytest.raises(_lp.UnboundedLP):
        _lp.max_concave_quad(np.zeros((1, 1)), np.array([1.0]),
                             np.array([[-1.0]]), np.array([0.0]))
