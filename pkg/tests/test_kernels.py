"""Kernel backends against exact small-problem oracles."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gnepkit import _kernels, _lp


def _project_simplex_oracle(y, scale=1.0):
    # exact KKT enumeration: active set = coordinates clipped to zero
    d = len(y)
    best, best_d = None, np.inf
    for mask in range(1 << d):
        free = [j for j in range(d) if not (mask >> j) & 1]
        if not free:
            continue
        lam = (sum(y[j] for j in free) - scale) / len(free)
        z = np.zeros(d)
        ok = True
        for j in free:
            z[j] = y[j] - lam
            if z[j] < -1e-12:
                ok = False
                break
        if not ok:
            continue
        # zero coordinates must want to stay at zero
        if any(y[j] - lam > 1e-12 for j in range(d) if (mask >> j) & 1):
            continue
        dist = np.sum((z - y) ** 2)
        if dist < best_d:
            best, best_d = z, dist
    return best


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_simplex_projection_matches_kkt_oracle(d, rng):
    for _ in range(50):
        y = rng.uniform(-2, 2, d)
        scale = float(rng.uniform(0.5, 3.0))
        got = _kernels.project_simplex(y, scale)
        want = _project_simplex_oracle(y, scale)
        assert np.allclose(got, want, atol=1e-9)
        assert got.min() >= -1e-12
        assert got.sum() == pytest.approx(scale, abs=1e-9)


def test_simplex_projection_fixed_point():
    z = np.array([0.2, 0.3, 0.5])
    assert np.allclose(_kernels.project_simplex(z), z, atol=1e-12)


def _project_poly_oracle(A, b, y):
    # exact euclidean projection via concave-QP enumeration:
    # argmax -0.5|z|^2 + <y, z>  over  Az <= b
    _, z = _lp.max_concave_quad(-np.eye(len(y)), y, A, b)
    return z


def test_dykstra_matches_qp_oracle(rng):
    for _ in range(40):
        d = int(rng.integers(1, 4))
        A = rng.standard_normal((int(rng.integers(d + 1, d + 5)), d))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        c = rng.uniform(-0.5, 0.5, d)
        b = A @ c + rng.uniform(0.3, 1.0, len(A))
        y = c + rng.uniform(1.0, 3.0) * rng.standard_normal(d)
        got = _kernels.dykstra_halfspaces(A, b, y)
        want = _project_poly_oracle(A, b, y)
        assert np.allclose(got, want, atol=1e-6), (got, want)


def test_dykstra_interior_point_unmoved():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0, 1.0, 0.0, 0.0])
    y = np.array([0.4, 0.7])
    assert np.allclose(_kernels.dykstra_halfspaces(A, b, y), y, atol=1e-12)


def test_backends_agree(rng):
    np_impl = _kernels.IMPLEMENTATIONS["numpy"]
    alt = _kernels.IMPLEMENTATIONS.get("numba")
    if alt is None:
        pytest.skip("numba unavailable")
    proj_np, dyk_np = np_impl
    proj_nb, dyk_nb = alt
    for _ in range(25):
        y = rng.uniform(-2, 2, 4)
        assert np.allclose(proj_np(y, 1.0), proj_nb(y, 1.0), atol=1e-12)
        A = rng.standard_normal((6, 3))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        b = A @ rng.uniform(-0.2, 0.2, 3) + rng.uniform(0.3, 1.0, 6)
        z = rng.standard_normal(3) * 2
        assert np.allclose(dyk_np(A, b, z, 10_000, 1e-10),
                           dyk_nb(A, b, z, 10_000, 1e-10), atol=1e-8)


def test_pure_numpy_env_flag_selects_fallback():
    code = ("import gnepkit; import numpy as np; "
            "print(gnepkit.kernel_backend()); "
            "print(gnepkit._kernels.project_simplex(np.array([2.0, -1.0]), 1.0))")
    env = dict(os.environ, GNEPKIT_PURE_NUMPY="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    assert out.stdout.splitlines()[0].strip() == "numpy"
    assert "[1. 0.]" in out.stdout
