from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest
import sympy as sp

from oracles import nested_coefficient
from vocluster.exactalg import DomainError, RationalFunctionField
from vocluster.characters import genus0_npoint, mode_expansion_oracle
from vocluster.voa import HeisenbergVOA

V = HeisenbergVOA(cutoff=8)
a = V.a(1)
w = V.omega


def symbolic(states):
    names = [f"y{i}" for i in range(1, len(states) + 1)]
    F = RationalFunctionField(names)
    val = genus0_npoint(states, names, F.gens())
    return val, names


def test_small_examples():
    assert genus0_npoint([], [], {}) == 1
    assert genus0_npoint([a], ["y1"], {"y1": Fraction(3)}) == 0
    val, names = symbolic([a, a])
    y1, y2 = sp.symbols(names)
    assert sp.simplify(val.as_expr() - 1 / (y1 - y2) ** 2) == 0


def test_two_point_mode_expansion():
    # oracle: sum_k (k+1) y2^k y1^{-k-2}
    for k in range(5):
        assert mode_expansion_oracle(V, [a, a], [k + 1, -k - 1]) == k + 1


def test_coincident_coordinates():
    with pytest.raises(DomainError):
        genus0_npoint([a, a], ["y", "y"], {"y": Fraction(1)})


CASES = [
    [a, a],
    [w, w],
    [a, a, w],
    [a, w, a],
    [V.a(2), a],
    [V.state("a(-1)a(-1)|0>"), V.a(2), V.a(2)],
]


@pytest.mark.parametrize("states", CASES, ids=lambda s: ";".join(map(str, s)))
def test_wick_against_nested_series_expansion(states):
    # oracle: independent sympy expansion of the Wick result vs mode algebra
    val, names = symbolic(states)
    ys = sp.symbols(names)
    expr = val.as_expr()
    n = len(states)
    total_weight = sum(s.weight for s in states)
    checked = 0
    for modes in product(range(-2, 3), repeat=n - 1):
        last = total_weight - n - sum(modes)
        modes = list(modes) + [last]
        exps = [-m - 1 for m in modes]
        oracle = nested_coefficient(expr, ys, exps)
        assert Fraction(str(oracle)) == mode_expansion_oracle(V, states, modes), modes
        checked += 1
    assert checked


@pytest.mark.parametrize("states", CASES[:4], ids=lambda s: ";".join(map(str, s)))
def test_evaluated_matches_symbolic(states):
    val, names = symbolic(states)
    point = {n: Fraction(3 * i + 1, i + 2) for i, n in enumerate(names)}
    got = genus0_npoint(states, names, point)
    ys = sp.symbols(names)
    want = val.as_expr().subs({y: sp.Rational(point[n].numerator, point[n].denominator) for y, n in zip(ys, names)})
    assert got == Fraction(str(want))
