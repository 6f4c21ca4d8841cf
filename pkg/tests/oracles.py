"""Independent reference computations used by the tests.

None of these go through the Wick-contraction or kernel code paths of the
package; they use sympy calculus, explicit partition combinatorics or
plain 2x2 matrix algebra.
"""
from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

import sympy as sp

from vocluster.voa import FockState, HeisenbergVOA, partitions


def nested_coefficient(expr, ys, exps):
    """Coefficient of prod ys[i]**exps[i] in expr expanded for |y_1| > ... > |y_n|.

    The innermost variable is expanded first, as a Laurent series about
    zero, then the next one, and so on outwards.
    """
    cur = sp.together(expr)
    for var, e in reversed(list(zip(ys, exps))):
        ser = sp.series(cur, var, 0, max(e + 1, 1)).removeO()
        cur = sp.expand(ser).coeff(var, e)
        if cur == 0:
            return sp.Integer(0)
    return sp.nsimplify(cur)


def divided_partial(expr, x, y, m, n):
    """(1/m! n!) d^m/dx^m d^n/dy^n expr by sympy."""
    return sp.simplify(sp.diff(expr, x, m, y, n) / (factorial(m) * factorial(n)))


def heisenberg_pairing(lam) -> int:
    """<a_lam 1, a_lam 1> = (-1)^{l(lam)} z_lam for the normalized form."""
    z = 1
    for part in set(lam):
        k = lam.count(part)
        z *= part**k * factorial(k)
    return (-1) ** len(lam) * z


def genus_one_partition_coefficients(voa: HeisenbergVOA, order: int) -> list[Fraction]:
    """c_n with Z = sum_n c_n rho^n (w_{-1} - w_1)^{-2n}.

    Uses the explicit dual basis a_lam / ((-1)^l z_lam) and the vacuum
    component of a_lam(2n - 1) a_lam from mode algebra.
    """
    out = []
    for n in range(order + 1):
        total = Fraction(0)
        for lam in partitions(n):
            b = FockState.monomial(lam)
            vac = voa.mode_action(b, 2 * n - 1, b).coefficient(())
            total += Fraction(vac) / heisenberg_pairing(lam)
        out.append(total)
    return out


def q_series_from_coefficients(coeffs, order: int) -> list[Fraction]:
    """Expand sum c_n (-q/(1+q)^2)^n in q through q^order.

    rho / (w_{-1} - w_1)^2 = -q/(1+q)^2 after the fixed-point substitution.
    """
    q = sp.Symbol("q")
    expr = sum(sp.Rational(c.numerator, c.denominator) * (-q / (1 + q) ** 2) ** n for n, c in enumerate(coeffs))
    ser = sp.series(expr, q, 0, order + 1).removeO()
    return [Fraction(str(ser.coeff(q, k))) for k in range(order + 1)]


def mobius_matrix(m) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(m.A), sp.Rational(m.B)], [sp.Rational(m.C), sp.Rational(m.D)]])


def apply_matrix(mat: sp.Matrix, z):
    z = sp.Rational(z)
    return (mat[0, 0] * z + mat[0, 1]) / (mat[1, 0] * z + mat[1, 1])


def reduced_word_count_bruteforce(genus: int, k: int) -> int:
    letters = [s * a for a in range(1, genus + 1) for s in (1, -1)]
    words = [()]
    for _ in range(k):
        words = [w + (c,) for w in words for c in letters if not w or w[-1] != -c]
    return len(words)


def random_rational(rng: random.Random, spread: int = 30, den: int = 6, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-spread, spread), rng.randint(1, den))
        if v or not nonzero:
            return v


def random_fixed_point_data(rng: random.Random, genus: int):
    """Distinct W_{+-a} and multipliers q_a outside {0, 1, -1}.

    q = -1 is excluded because it makes w_a = w_{-a}.
    """
    used: set[Fraction] = set()
    Wp, Wm, q = [], [], []
    for _ in range(genus):
        for target in (Wp, Wm):
            while True:
                v = random_rational(rng)
                if v not in used:
                    break
            used.add(v)
            target.append(v)
        while True:
            t = random_rational(rng, 9, 9, nonzero=True)
            if t not in (1, -1):
                break
        q.append(t)
    return Wp, Wm, q


def random_sl2(rng: random.Random):
    """A random rational matrix of determinant one."""
    a = random_rational(rng, 9, 4, nonzero=True)
    b = random_rational(rng, 9, 4)
    c = random_rational(rng, 9, 4)
    return a, b, c, (1 + b * c) / a


def random_skew_symmetrizable(rng: random.Random, n: int, bound: int = 2, max_entry: int = 3) -> list[list[int]]:
    """B = C S with S skew-symmetric, C a positive diagonal and |b_ij| <= max_entry."""
    while True:
        S = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                v = rng.randint(-bound, bound)
                S[i][j], S[j][i] = v, -v
        c = [rng.choice((1, 1, 2, 3)) for _ in range(n)]
        B = [[c[i] * S[i][j] for j in range(n)] for i in range(n)]
        if all(abs(v) <= max_entry for row in B for v in row):
            return B


def virasoro_normal_ordered(voa: HeisenbergVOA, n: int, v: FockState) -> FockState:
    """L(n)v = 1/2 sum_{i+j=n} :a(i)a(j): v from single Heisenberg modes (rank one)."""
    bound = max(v.weights()) + abs(n) + 1
    out = FockState.zero()
    for i in range(-bound, bound + 1):
        j = n - i
        # normal order: annihilators (positive modes) to the right
        first, second = (i, j) if i <= j else (j, i)
        out = out + voa.heisenberg(first, voa.heisenberg(second, v)) * Fraction(1, 2)
    return out
