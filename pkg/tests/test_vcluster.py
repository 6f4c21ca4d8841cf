from __future__ import annotations

import random
from fractions import Fraction

import pytest

from vocluster.characters import genus_g_npoint, random_context, zhu_reduce
from vocluster.exactalg import ConfigurationError, ConsistencyError, DomainError
from vocluster.vcluster import (
    MutationSpec,
    algebra_registry,
    double_mutation_report,
    extend_point,
    fresh_value,
    lift,
    make_seed,
    mutate_character,
    mutate_operators,
    mutate_seed,
    mutate_states,
    recompute_discrepancy,
    register_map,
    registered_maps,
    schottky_instantiation,
    seed_from_json,
    seed_to_json,
    spec_from_json,
    vacuum_involution_check,
    vacuum_spec,
)
from vocluster.voa import HeisenbergVOA

V = HeisenbergVOA(cutoff=8)
a = V.a(1)
w = V.omega


def seed_for(states, genus=1, T=1, extra=("x",), rng_seed=0):
    coords = [f"y{i}" for i in range(1, len(states) + 1)]
    ctx = random_context(V, genus, T, coords + list(extra), random.Random(rng_seed))
    return make_seed(ctx, states, coords)


def test_state_maps():
    seed = seed_for([a, w])
    assert mutate_states(seed, MutationSpec(a, 1, 1)) == (V.vacuum, w)
    assert mutate_states(seed, MutationSpec(V.vacuum, -1, "all", F="vacuum", xi=-1)) == (-a, -w)
    trans = mutate_states(seed, MutationSpec(V.vacuum, -1, 2, F="translation"))
    assert trans == (a, V.mode_action(w, 0, w))
    assert trans[1] == V.L(-1, w)


def test_operators_follow_states():
    seed = seed_for([a, a])
    spec = MutationSpec(V.vacuum, -1, 1, F="vacuum", G="vacuum", xi=-1)
    ops = mutate_operators(seed, spec)
    assert [o.state for o in ops] == list(mutate_states(seed, spec))
    assert [o.coord for o in ops] == ["y1", "y2"]


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        MutationSpec(a, xi=2)
    with pytest.raises(ConfigurationError):
        MutationSpec(a, F="missing")
    with pytest.raises(ConfigurationError):
        MutationSpec(a, direction=1.5)
    with pytest.raises(ConfigurationError):
        MutationSpec(a, direction=3).directions(2)
    with pytest.raises(ConfigurationError):
        register_map("mode", lambda *args: args[3])
    assert {"mode", "vacuum", "translation"} <= set(registered_maps())


def test_character_needs_bound_family():
    seed = seed_for([a])
    with pytest.raises(ConfigurationError):
        mutate_character(seed, MutationSpec(a), "x")
    with pytest.raises(DomainError):
        mutate_character(seed, schottky_instantiation(MutationSpec(a)), "y1")
    with pytest.raises(ConfigurationError):
        schottky_instantiation(MutationSpec(a, H="vacuum"))


@pytest.mark.parametrize("states", [[a], [a, w], [w]], ids=["a", "a,w", "w"])
def test_schottky_instantiation_is_the_reduction(states):
    seed = seed_for(states, T=2)
    spec = schottky_instantiation(MutationSpec(a))
    got = mutate_character(seed, spec, "x")
    want = zhu_reduce(seed.ctx, a, "x", seed.insertions())
    assert got.value.content_hash() == want.value.content_hash()


def test_lift_prepends_mutator():
    seed = seed_for([a], T=1)
    spec = schottky_instantiation(MutationSpec(a))
    up = lift(seed, spec, "x")
    assert up.states == (a, a) and up.coords == ("x", "y1")
    direct = genus_g_npoint(seed.ctx, up.insertions())
    assert up.character.value.content_hash() == direct.value.content_hash()


def test_vacuum_character_is_unchanged():
    seed = seed_for([a, a], T=1)
    for xi in (1, -1):
        ch = mutate_character(seed, vacuum_spec(V, xi), "x")
        assert ch.value.content_hash() == seed.character.value.content_hash()


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("xi", [1, -1])
@pytest.mark.parametrize("T", [0, 1])
def test_vacuum_involution(n, xi, T):
    seed = seed_for([a, w][:n], T=T, extra=())
    rep = vacuum_involution_check(seed, xi)
    assert rep.ok, rep.detail
    assert rep.to_json()["character_hash"] == seed.character.value.content_hash()


def test_vacuum_involution_single_direction():
    seed = seed_for([a, w], T=1, extra=())
    assert vacuum_involution_check(seed, -1, 2).ok


def test_sign_flip_changes_stored_character_consistency():
    # xi = -1 negates one state; the stored character no longer matches for odd counts
    seed = seed_for([a, a], T=1)
    spec = vacuum_spec(V, -1, 1)
    once = mutate_seed(seed, spec, "x")
    assert once.states == (-a, a)
    report = recompute_discrepancy(once)
    assert not report["consistent"] and report["first_difference"] is not None
    assert recompute_discrepancy(seed) == {"consistent": True}


def test_double_mutation_report():
    seed = seed_for([a, w])
    assert double_mutation_report(seed, vacuum_spec(V, -1)) == {
        "states_restored": True, "operators_restored": True}
    rep = double_mutation_report(seed, MutationSpec(a, 1, 1))
    assert rep["states_restored"] is False


def test_registry():
    ctx = random_context(V, 1, 1, ["y1", "y2"], random.Random(3))
    reg = algebra_registry(ctx, 2)
    assert sorted(reg) == [0, 1, 2]
    assert len(algebra_registry(ctx, 0)) == 1
    assert reg[2].seed([a, a]).coords == ("y1", "y2")
    with pytest.raises(ConfigurationError):
        reg[1].seed([a, a])
    with pytest.raises(ConfigurationError):
        algebra_registry(ctx, -1)


def test_make_seed_validation():
    ctx = random_context(V, 1, 1, ["y1", "y2"], random.Random(3))
    with pytest.raises(ConfigurationError):
        make_seed(ctx, [a], ["y1", "y2"])
    with pytest.raises(ConfigurationError):
        make_seed(ctx, [a, a], ["y1", "y1"])


def test_json_round_trip():
    seed = seed_for([a, w], T=1)
    data = seed_to_json(seed)
    back = seed_from_json(data, V)
    assert back.states == seed.states and back.coords == seed.coords
    assert back.character.value.content_hash() == data["character_hash"]
    with pytest.raises(ConsistencyError):
        seed_from_json({**data, "character_hash": "0" * 64}, V)
    with pytest.raises(ConfigurationError):
        seed_from_json({"genus": 1}, V)


def test_spec_from_json():
    spec = spec_from_json({"u": "vacuum", "F": "vacuum", "G": "vacuum", "xi": -1}, V)
    assert spec.u == V.vacuum and spec.xi == -1 and spec.f is not None
    bare = spec_from_json({"u": "a(-1)|0>", "schottky": False}, V)
    assert bare.u == a and bare.f is None
    with pytest.raises(ConfigurationError):
        spec_from_json({"mode": "x"}, V)


def test_extend_point_and_fresh_value():
    ctx = random_context(V, 1, 1, ["y1"], random.Random(0))
    v = fresh_value(ctx)
    assert v not in {Fraction(x) for x in ctx.point.values()}
    ext = extend_point(ctx, "x", v)
    assert ext.point["x"] == v and extend_point(ext, "x", 0) is ext
