"""Genus-zero correlation functions of the Heisenberg VOA.

Z0(v_1,y_1; ...; v_n,y_n) = <1, Y(v_1,y_1)...Y(v_n,y_n) 1> as a rational
function.  Each Fock monomial a(-n_1)...a(-n_k)1 contributes the normal
ordered product of fields d^{(n_i - 1)} a(y), so the correlator is a sum
over perfect matchings of factors at distinct points (Wick's theorem).  The
contraction of d^{(r)}a(y_i) with d^{(s)}a(y_j) is

    (-1)^r (r+s+1)! / (r! s!) (y_i - y_j)^{-r-s-2}.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any, Iterable, Mapping, Sequence

from sympy.polys.fields import FracElement

from ..exactalg import DomainError, PoleError, to_fraction
from ..voa import FockState, HeisenbergVOA, Monomial

# a factor is (vertex index, derivative order r, colour)
Factor = tuple[int, int, int]
PairKey = tuple[tuple[tuple[int, int], int], ...]


def _contraction_coeff(r: int, s: int) -> int:
    sign = -1 if r % 2 else 1
    return sign * factorial(r + s + 1) // (factorial(r) * factorial(s))


def _merge(key: PairKey, pair: tuple[int, int], power: int) -> PairKey:
    d = dict(key)
    d[pair] = d.get(pair, 0) + power
    return tuple(sorted(d.items()))


@lru_cache(maxsize=None)
def wick(factors: tuple[Factor, ...]) -> tuple[tuple[PairKey, int], ...]:
    """All complete contractions of ``factors`` (sorted by vertex).

    Returns (key, coefficient) pairs where key lists ((i, j), e) meaning
    (y_i - y_j)^{-e} with i < j.
    """
    if not factors:
        return (((), 1),)
    if len(factors) % 2:
        return ()
    f0, rest = factors[0], factors[1:]
    out: dict[PairKey, int] = {}
    for idx, f in enumerate(rest):
        if f[0] == f0[0] or f[2] != f0[2]:
            continue
        c = _contraction_coeff(f0[1], f[1])
        pair = (f0[0], f[0])
        power = f0[1] + f[1] + 2
        for key, val in wick(rest[:idx] + rest[idx + 1 :]):
            nk = _merge(key, pair, power)
            out[nk] = out.get(nk, 0) + c * val
    return tuple((k, v) for k, v in out.items() if v)


def monomial_factors(vertex: int, key: Monomial) -> tuple[Factor, ...]:
    return tuple((vertex, n - 1, c) for n, c in key)


class PropagatorSum:
    """sum_key c_key prod (z_i - z_j)^{-e} over named points.

    Pairs are stored with names in a fixed canonical order so that sums
    over many basis configurations share keys.
    """

    def __init__(self, name_order: Sequence[str]):
        self.rank = {n: i for i, n in enumerate(name_order)}
        self.terms: dict[tuple[tuple[tuple[str, str], int], ...], Any] = {}

    def add(self, names: Sequence[str], key: PairKey, coeff: Any) -> None:
        sign = 1
        d: dict[tuple[str, str], int] = {}
        for (i, j), e in key:
            a, b = names[i], names[j]
            if a == b:
                raise DomainError(f"coincident insertion points {a}")
            if self.rank[a] > self.rank[b]:
                a, b = b, a
                if e % 2:
                    sign = -sign
            d[(a, b)] = d.get((a, b), 0) + e
        k = tuple(sorted(d.items()))
        v = self.terms.get(k, 0) + coeff * sign
        if v:
            self.terms[k] = v
        else:
            self.terms.pop(k, None)

    def evaluate(self, point: Mapping[str, Any]) -> Any:
        if not self.terms:
            return Fraction(0)
        symbolic = any(isinstance(point[n], FracElement) for n in self.rank if n in point)
        if symbolic:
            return self._evaluate_symbolic(point)
        inv: dict[tuple[str, str], Fraction] = {}
        total = Fraction(0)
        for k, c in self.terms.items():
            term = to_fraction(c)
            for pair, e in k:
                if pair not in inv:
                    d = to_fraction(point[pair[0]]) - to_fraction(point[pair[1]])
                    if not d:
                        raise PoleError(f"points {pair} coincide")
                    inv[pair] = 1 / d
                term *= inv[pair] ** e
            total += term
        return total

    def _evaluate_symbolic(self, point: Mapping[str, Any]) -> Any:
        # common denominator: far cheaper than summing reduced fractions
        field = next(point[n].field for n in self.rank if n in point and isinstance(point[n], FracElement))
        ring = field.ring
        maxpow: dict[tuple[str, str], int] = {}
        for k in self.terms:
            for pair, e in k:
                maxpow[pair] = max(maxpow.get(pair, 0), e)
        diff_num: dict[tuple[str, str], Any] = {}
        diff_den: dict[tuple[str, str], Any] = {}
        for pair in maxpow:
            d = field(point[pair[0]]) - field(point[pair[1]])
            if not d:
                raise PoleError(f"points {pair} coincide")
            diff_num[pair], diff_den[pair] = d.numer, d.denom
        # prod (n/m)^{-e} = m^e / n^e; bring everything over prod n^{max}
        num = ring(0)
        for k, c in self.terms.items():
            t = ring(field(c).numer) if isinstance(c, FracElement) else ring(_qq(c))
            have = dict(k)
            for pair, mp in maxpow.items():
                e = have.get(pair, 0)
                t = t * diff_den[pair] ** e * diff_num[pair] ** (mp - e)
            if isinstance(c, FracElement) and not c.denom.is_ground:
                raise DomainError("symbolic coefficients must be polynomial")
            num += t
        den = ring(1)
        for pair, mp in maxpow.items():
            den *= diff_num[pair] ** mp
        return field(num) / field(den)


def _qq(c: Any):
    from sympy import QQ

    f = to_fraction(c)
    return QQ(f.numerator, f.denominator)


def accumulate(acc: PropagatorSum, insertions: Sequence[tuple[FockState, str]], scale: Any = 1) -> None:
    """Add scale * Z0(insertions) into ``acc`` (multilinear expansion)."""
    names = [name for _, name in insertions]
    per_slot = [list(state.items()) for state, _ in insertions]
    if any(not slot for slot in per_slot):
        return

    def rec(i: int, factors: tuple, coeff: Any):
        if i == len(per_slot):
            fs = tuple(sorted(factors))
            for key, val in wick(fs):
                acc.add(names, key, coeff * val)
            return
        for mono, c in per_slot[i]:
            rec(i + 1, factors + monomial_factors(i, mono), coeff * c)

    rec(0, (), scale)


def genus0_npoint(states: Sequence[FockState], coords: Sequence[str], point: Mapping[str, Any],
                  name_order: Sequence[str] | None = None) -> Any:
    """<1, Y(v_1,y_1)...Y(v_n,y_n) 1> evaluated at ``point``.

    ``point`` maps coordinate names to Fractions (evaluated mode) or to
    elements of one rational function field (symbolic mode).
    """
    if len(states) != len(coords):
        raise DomainError("states and coordinates differ in length")
    if len(set(coords)) != len(coords):
        raise DomainError(f"coincident coordinate symbols in {list(coords)}")
    if not states:
        return Fraction(1)
    acc = PropagatorSum(name_order or list(coords))
    accumulate(acc, list(zip(states, coords)))
    return acc.evaluate(point)


def mode_expansion_oracle(voa: HeisenbergVOA, states: Sequence[FockState], modes: Sequence[int]) -> Any:
    """<1, v_1(m_1) ... v_n(m_n) 1> by direct mode algebra.

    The coefficient of prod y_i^{-m_i-1} of the correlator expanded in the
    region |y_1| > ... > |y_n|.
    """
    state = voa.vacuum
    for v, m in zip(reversed(states), reversed(modes)):
        state = voa.mode_action(v, m, state)
        if state.is_zero():
            return Fraction(0)
    return to_fraction(state.coefficient(()))


@dataclass(frozen=True)
class Insertion:
    state: FockState
    coord: str


def as_insertions(pairs: Iterable) -> list[tuple[FockState, str]]:
    out = []
    for item in pairs:
        if isinstance(item, Insertion):
            out.append((item.state, item.coord))
        else:
            s, c = item
            out.append((s, c))
    return out
