from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    apply_matrix,
    mobius_matrix,
    random_fixed_point_data,
    random_rational,
    random_sl2,
    reduced_word_count_bruteforce,
)
from vocluster.exactalg import ConfigurationError, PoleError
from vocluster.schottky import (
    INFINITY,
    DegenerateHandleError,
    GroupWord,
    MobiusMap,
    SchottkyParams,
    attracting_fixed_point,
    enumerate_words,
    generator_from_fixed_points,
    generator_map,
    jordan_condition,
    limit_point_cloud,
    params_from_fixed_points,
    sewing_check,
    sewing_check_rho,
    sewing_forms_agree,
    sl2_action,
    word_count,
    word_map,
)


def random_params(rng, genus=None):
    genus = genus or rng.randint(1, 3)
    return params_from_fixed_points(*random_fixed_point_data(rng, genus))


def sample_z(rng, params, a):
    bad = {params.W[a], params.W[-a], params.w[-a]}
    while True:
        z = random_rational(rng)
        if z not in bad:
            return z


def test_fixed_point_example():
    t = Fraction(2, 7)
    p = params_from_fixed_points([1], [0], [t])
    assert p.w[1] == 1 / (1 - t)
    assert p.w[-1] == -t / (1 - t)
    assert p.rho[1] == p.rho[-1] == -t / (1 - t) ** 2
    g = generator_map(p, 1)
    rng = random.Random(0)
    for _ in range(20):
        z = sample_z(rng, p, 1)
        assert (g(z) - p.w[-1]) * (z - p.w[1]) == p.rho[1]


def test_fixed_point_errors():
    with pytest.raises(PoleError):
        params_from_fixed_points([1], [0], [1])
    with pytest.raises(DegenerateHandleError):
        params_from_fixed_points([1], [1], [Fraction(1, 2)])
    with pytest.raises(DegenerateHandleError):
        SchottkyParams(1, {1: 0, -1: 0}, {1: 1})


def test_generators_fix_W():
    rng = random.Random(1)
    for _ in range(100):
        p = random_params(rng)
        for a in range(1, p.genus + 1):
            g = generator_map(p, a)
            assert g(p.W[a]) == p.W[a] and g(p.W[-a]) == p.W[-a]
            assert (g @ generator_map(p, -a)).is_identity()
            assert g.same_transformation(generator_from_fixed_points(p.W[a], p.W[-a], p.q[a]))


def test_sewing_forms_100_random():
    rng = random.Random(2)
    for _ in range(100):
        p = random_params(rng)
        a = rng.randint(1, p.genus)
        g = generator_map(p, a)
        z = sample_z(rng, p, a)
        zp = g(z)
        if zp in (p.W[a], p.W[-a]) or zp is INFINITY:
            continue
        assert sewing_check(p, a, z, zp) and sewing_check_rho(p, a, z, zp)
        assert sewing_forms_agree(p, a, z, zp)
        assert not sewing_check_rho(p, a, z, zp + 1)
        if zp + 1 not in (p.W[a], p.W[-a]):
            assert not sewing_check(p, a, z, zp + 1)
            assert sewing_forms_agree(p, a, z, zp + 1)


def test_sewing_pole():
    p = params_from_fixed_points([1], [0], [Fraction(1, 3)])
    with pytest.raises(PoleError):
        sewing_check(p, 1, 1, 5)


def test_jordan_examples():
    p = SchottkyParams(2, {1: 0, -1: 10, 2: 5, -2: 15}, {1: 1, 2: 1})
    assert jordan_condition(p) == (True, None)
    p = SchottkyParams(2, {1: 0, -1: 10, 2: 5, -2: 15}, {1: 9, 2: 9})
    assert jordan_condition(p) == (False, (1, 2))
    p = SchottkyParams(1, {1: 0, -1: 1}, {1: 1})
    assert jordan_condition(p) == (False, (1, -1))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 40))
def test_jordan_matches_floating_point_away_from_boundary(d, ra, rb):
    p = SchottkyParams(1, {1: 0, -1: d}, {1: ra})
    exact, _ = jordan_condition(p)
    margin = d - 2 * ra**0.5
    if abs(margin) > 1e-9:
        assert exact == (margin > 0)


def test_sl2_examples():
    p = SchottkyParams(1, {1: 2, -1: 7}, {1: Fraction(1, 3)})
    t = sl2_action(MobiusMap(1, 1, 0, 1), p)
    assert t.w == {1: 3, -1: 8} and t.rho[1] == Fraction(1, 3)
    lam = Fraction(3, 2)
    s = sl2_action(MobiusMap(lam, 0, 0, 1 / lam), p)
    assert s.w == {1: lam**2 * 2, -1: lam**2 * 7} and s.rho[1] == lam**4 / 3
    with pytest.raises(ConfigurationError):
        sl2_action(MobiusMap(2, 0, 0, 1), p)


def _equivariance_case(rng):
    Wp, Wm, q = random_fixed_point_data(rng, rng.randint(1, 2))
    gamma = MobiusMap(*random_sl2(rng))
    images = [gamma(v) for v in Wp + Wm]
    if any(v is INFINITY for v in images):
        return None
    try:
        lhs = sl2_action(gamma, params_from_fixed_points(Wp, Wm, q))
    except PoleError:
        return None
    g = len(Wp)
    rhs = params_from_fixed_points(images[:g], images[g:], q)
    return lhs, rhs


def test_equivariance_100_random():
    rng = random.Random(3)
    done = 0
    while done < 100:
        case = _equivariance_case(rng)
        if case is None:
            continue
        lhs, rhs = case
        assert lhs.w == rhs.w and lhs.rho == rhs.rho and lhs.W == rhs.W
        done += 1


def test_group_action_law_100_random():
    rng = random.Random(4)
    done = 0
    while done < 100:
        p = random_params(rng, rng.randint(1, 2))
        g1, g2 = MobiusMap(*random_sl2(rng)), MobiusMap(*random_sl2(rng))
        try:
            lhs = sl2_action(g1, sl2_action(g2, p))
            rhs = sl2_action(g1 @ g2, p)
        except PoleError:
            continue
        assert lhs.w == rhs.w and lhs.rho == rhs.rho
        done += 1


def test_word_enumeration():
    words = {str(w) for w in enumerate_words(1, 2)}
    assert words == {"e", "g1", "g-1", "g1.g1", "g-1.g-1"}
    for g in (1, 2, 3):
        for k in range(6):
            n = sum(1 for w in enumerate_words(g, k) if len(w) == k)
            assert n == word_count(g, k) == reduced_word_count_bruteforce(g, k)
    with pytest.raises(ConfigurationError):
        GroupWord((1, -1))


def test_word_map_is_matrix_product():
    rng = random.Random(5)
    for _ in range(100):
        p = random_params(rng, 2)
        word = [rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(1, 5))]
        word = [x for i, x in enumerate(word) if i == 0 or word[i - 1] != -x]
        mat = sp.eye(2)
        for x in word:
            mat = mat * mobius_matrix(generator_map(p, x))
        m = word_map(p, word)
        assert m.same_transformation(MobiusMap(*(Fraction(str(v)) for v in mat)))
        z = sample_z(rng, p, 1)
        expected = apply_matrix(mat, z)
        got = m(z)
        if got is not INFINITY:
            assert Fraction(str(expected)) == got


def test_limit_points():
    p = params_from_fixed_points([1, 100], [0, 50], [Fraction(1, 100)] * 2)
    assert jordan_condition(p)[0]
    cloud = limit_point_cloud(p, 2)
    assert all(str(lp.word) != "e" for lp in cloud)
    got = {str(lp.word): lp.point.as_fraction() for lp in cloud if len(lp.word) == 1}
    assert got == {"g1": 0, "g-1": 1, "g2": 50, "g-2": 100}
    assert all(lp.flag == "loxodromic" for lp in cloud)
    assert len(cloud) == 4 + 12


def test_limit_point_flags():
    assert attracting_fixed_point(MobiusMap(1, 1, 0, 1)) == (INFINITY, "parabolic")
    assert attracting_fixed_point(MobiusMap(1, 0, 0, -1)) == (None, "neutral")
    assert attracting_fixed_point(MobiusMap(0, -1, 1, 0))[1] == "elliptic"
    assert attracting_fixed_point(MobiusMap(1, 0, 0, 1)) == (None, "identity")
    assert attracting_fixed_point(MobiusMap(1, -1, 1, 1))[1] == "elliptic"
    with pytest.raises(ConfigurationError):
        limit_point_cloud(SchottkyParams(1, {1: 0, -1: 1}, {1: 1}), 1)


def test_params_json_round_trip():
    p = params_from_fixed_points([1, Fraction(5, 2)], [0, -3], [Fraction(1, 5), Fraction(-2, 9)])
    assert SchottkyParams.from_json(p.to_json()) == p
    only_fixed = {"genus": 1, "W": {"1": "1", "-1": "0"}, "q": {"1": "1/4"}}
    assert SchottkyParams.from_json(only_fixed).rho[1] == params_from_fixed_points([1], [0], [Fraction(1, 4)]).rho[1]
    with pytest.raises(ConfigurationError):
        SchottkyParams.from_json({"genus": 1, "w": {"1": "x"}})


def test_mobius_parse():
    assert MobiusMap.parse("1,2,3,7") == MobiusMap(1, 2, 3, 7)
    with pytest.raises(ConfigurationError):
        MobiusMap.parse("1,2,3")
    with pytest.raises(ConfigurationError):
        MobiusMap.parse("1,2,2,4")
