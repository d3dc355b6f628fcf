import numpy as np
import pytest

from gnepkit.convexsets import Ball, Box, HPoly, Intersection
from gnepkit.game import (
    FixedConstraint,
    GameInstance,
    SharedSlice,
    Tolerances,
    check_Cx,
    check_coercivity_jointly_convex,
    constraint_body,
    jointly_convex_game,
    membership_violation,
    slice_body,
    verify_equilibrium,
)
from gnepkit.preferences import LinearUtility, PreferenceMap, QuadUtility
from gnepkit import instances as gi


# -- slices ------------------------------------------------------------------


def test_slice_box():
    B = Box([0.0, 0.0], [1.0, 2.0])
    S = slice_body(B, np.array([0.5, 1.5]), slice(1, 2))
    assert S.contains([1.9]) and not S.contains([2.1])


def test_slice_hpoly_triangle():
    T = HPoly([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])
    S = slice_body(T, np.array([0.25, 0.3]), slice(0, 1))
    # fixing x2 = 0.3 leaves x1 in [0, 0.7]
    assert S.contains([0.0]) and S.contains([0.7]) and not S.contains([0.71])


def test_slice_ball():
    B = Ball([0.0, 0.0], 1.0)
    S = slice_body(B, np.array([0.0, 0.6]), slice(0, 1))
    assert S.contains([0.79]) and not S.contains([0.81])


def test_slice_empty_when_rivals_outside():
    T = HPoly([[1.0, 1.0]], [1.0])
    S = slice_body(T, np.array([0.0, 1.5]), slice(0, 1))
    assert not S.contains([0.0])  # needs x1 <= -0.5, clipped below by nothing


def test_membership_violation_values():
    B = Box([0.0, 0.0], [1.0, 1.0])
    assert membership_violation(B, np.array([0.5, 0.5])) <= 0
    assert membership_violation(B, np.array([1.2, 0.5])) == pytest.approx(0.2, abs=1e-9)


# -- assembly ----------------------------------------------------------------


def test_blocks_must_be_contiguous():
    p0 = PreferenceMap(0, 0, Box([0.0], [1.0]), LinearUtility([1.0]))
    p1_gap = PreferenceMap(1, 2, Box([0.0], [1.0]), LinearUtility([1.0]))
    with pytest.raises(ValueError):
        GameInstance((p0, p1_gap),
                     (FixedConstraint(Box([0.0], [1.0])),) * 2, None, "gap")


def test_shared_set_requires_shared_slices():
    p0 = PreferenceMap(0, 0, Box([0.0], [1.0]), LinearUtility([1.0]))
    with pytest.raises(ValueError):
        GameInstance((p0,), (FixedConstraint(Box([0.0], [1.0])),),
                     Box([0.0], [1.0]), "mixed")


def test_shared_set_wrapped_when_it_pokes_out_of_ambients():
    # shared face allows x2 up to 1.1 but X_2 = [0,1]: assembly must clip,
    # otherwise the VI can converge to a game-infeasible point
    shared = HPoly([[-1.0, 0.0], [0.0, -1.0], [2.0, 1.0]], [0.0, 0.0, 1.1])
    g = jointly_convex_game([Box([0.0], [1.0])] * 2,
                            [LinearUtility([1.0])] * 2, shared)
    assert not g.shared_set.contains(np.array([0.04, 1.02]))
    assert g.shared_set.contains(np.array([0.05, 1.0]))


def test_contained_shared_set_left_alone():
    g = gi.splitting_game()
    assert isinstance(g.shared_set, HPoly)


# -- certificates ------------------------------------------------------------


def test_splitting_interior_point_slack():
    g = gi.splitting_game()
    cert = verify_equilibrium(g, np.array([0.3, 0.3]))
    assert not cert.is_equilibrium
    assert np.allclose(cert.emptiness_slacks, [0.4, 0.4], atol=1e-9)


def test_splitting_face_point_certified():
    g = gi.splitting_game()
    cert = verify_equilibrium(g, np.array([0.25, 0.75]))
    assert cert.is_equilibrium
    assert max(cert.feasibility_slacks) <= 1e-7


def test_one_sided_equilibrium_certified():
    g = gi.one_sided_counterexample()
    cert = verify_equilibrium(g, np.array([1.0, 0.0]))
    assert cert.is_equilibrium


def test_infeasible_point_rejected():
    g = gi.splitting_game()
    cert = verify_equilibrium(g, np.array([0.8, 0.8]))
    assert not cert.is_equilibrium
    assert max(cert.feasibility_slacks) > 1e-3


def test_certificate_serializes():
    g = gi.splitting_game()
    d = verify_equilibrium(g, np.array([0.5, 0.5])).to_dict()
    assert d["is_equilibrium"] is True
    assert len(d["emptiness_slacks"]) == 2


# -- coercivity samplers ------------------------------------------------------


def test_bounded_instance_vacuous():
    rep = check_coercivity_jointly_convex(gi.splitting_game(), rho=3.0)
    assert rep.status == "vacuous"


def test_inward_unbounded_holds():
    rep = check_coercivity_jointly_convex(gi.coercive_inward_game(), rho=5.0)
    assert rep.status == "holds_on_samples"
    assert rep.n_checked > 0


def test_outward_unbounded_violated_with_witness():
    rep = check_coercivity_jointly_convex(gi.coercive_outward_game(), rho=5.0)
    assert rep.status == "violated"
    x = np.asarray(rep.witness)
    assert np.linalg.norm(x) > 5.0
    assert check_Cx(gi.coercive_outward_game(), x, rho_x=5.0).status == "violated"


def test_inward_far_point_has_nearby_dominator():
    g = gi.coercive_inward_game()
    rep = check_Cx(g, np.array([8.0, 8.0]), rho_x=5.0)
    assert rep.status == "holds_on_samples"
    _, z = rep.witness
    assert np.linalg.norm(z) <= 5.0 + 1e-9
