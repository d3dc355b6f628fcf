import json
import math

import numpy as np
import pytest

from gnepkit.convexsets import Ball, Box, HPoly, Simplex, body_from_dict
from gnepkit.jsonio import (
    NotSerializableError,
    canonical_dumps,
    economy_from_dict,
    economy_to_dict,
    game_from_dict,
    game_to_dict,
    load_instance,
    save_instance,
    variant_from_dict,
    variant_to_dict,
)
from gnepkit.preferences import (
    LinearUtility,
    PolyhedralPref,
    QuadUtility,
    RelationOracle,
    UnionPref,
)
from gnepkit import instances as gi


def test_canonical_is_sorted_compact_and_newline_terminated():
    s = canonical_dumps({"b": 1, "a": [1.5, 2]})
    assert s == '{"a":[1.5,2],"b":1}\n'


def test_canonical_rejects_nothing_but_encodes_nonfinite_as_strings():
    s = canonical_dumps({"v": [np.inf, -np.inf, np.nan]})
    assert json.loads(s)["v"] == ["Infinity", "-Infinity", "NaN"]


def test_canonical_handles_numpy_scalars():
    s = canonical_dumps({"i": np.int64(3), "f": np.float64(0.25), "b": np.bool_(True)})
    assert json.loads(s) == {"i": 3, "f": 0.25, "b": True}


@pytest.mark.parametrize("body", [
    Box([0.0, -1.0], [1.0, 2.0]),
    Simplex(3, scale=2.0),
    Ball([0.5, 0.5], 0.25),
    HPoly([[1.0, 1.0], [-1.0, 0.0]], [1.0, 0.0]),
])
def test_body_round_trip(body, rng):
    clone = body_from_dict(body.to_dict())
    for _ in range(20):
        x = rng.uniform(-1.5, 2.5, body.dim)
        assert body.contains(x) == clone.contains(x)


@pytest.mark.parametrize("v", [
    LinearUtility([1.0, -2.0]),
    QuadUtility([[-2.0, 0.0], [0.0, -1.0]], [0.5, 0.0]),
    PolyhedralPref.constant([[1.0]], [0.3]),
    UnionPref((PolyhedralPref.constant([[1.0]], [0.2]),
               PolyhedralPref.constant([[-1.0]], [-0.8]))),
])
def test_variant_round_trip(v):
    w = variant_from_dict(variant_to_dict(v))
    assert type(w) is type(v)
    assert canonical_dumps(variant_to_dict(v)) == canonical_dumps(variant_to_dict(w))


def test_relation_oracle_not_serializable():
    with pytest.raises(NotSerializableError):
        variant_to_dict(RelationOracle(lambda x, z: False))


def test_x_dependent_rows_not_serializable():
    with pytest.raises(NotSerializableError):
        variant_to_dict(PolyhedralPref(lambda x: None))


def test_game_round_trip_preserves_solutions():
    from gnepkit.solvers import solve_vi

    g = gi.splitting_game()
    g2 = game_from_dict(game_to_dict(g))
    assert canonical_dumps(game_to_dict(g2)) == canonical_dumps(game_to_dict(g))
    r1, r2 = solve_vi(g), solve_vi(g2)
    assert np.allclose(r1.point, r2.point)


def test_economy_round_trip():
    e = gi.pure_exchange_economy()
    e2 = economy_from_dict(economy_to_dict(e))
    assert canonical_dumps(economy_to_dict(e2)) == canonical_dumps(economy_to_dict(e))


def test_save_load_identity_for_bundled_instances(tmp_path):
    for name, inst in [
        ("g.json", gi.splitting_game()),
        ("e.json", gi.two_consumer_exchange()),
    ]:
        p = tmp_path / name
        save_instance(inst, p)
        first = p.read_bytes()
        save_instance(load_instance(p), p)
        assert p.read_bytes() == first


def test_load_rejects_unknown_type(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"type":"mystery"}')
    with pytest.raises(ValueError):
        load_instance(p)
