"""The genus-g Zhu recursion: kernel side and brute-force side.

For a quasiprimary u of weight p,

    F(u, x; v, y) = sum_k sum_j d^{(0,j)} Psi_p(x, y_k) F(...; u(j)v_k, y_k; ...) dy_k^j
                    + sum_a sum_l Theta_a(x; l) O_a(u; v, y; l).

The kernel is built at the working order T + p - 1: theta carries
rho_a^{p-1-l}, which is negative for l > p - 1, and the o-vectors have
valuation at least l - p + 1, so the product is exact through T.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from sympy.polys.fields import FracElement

from ..exactalg import (
    ConsistencyError,
    DiffForm,
    DomainError,
    TruncatedSeries,
    to_fraction,
)
from ..voa import FockState
from ..zhukernel import KernelConfig, ZhuKernel
from .genus_g import (
    CharacterContext,
    Insertions,
    NPointResult,
    _require_quasiprimary,
    form_degrees,
    genus_sum,
    o_entry,
    reduction_terms,
    replaced,
)


@dataclass
class ReductionTerm:
    kind: str            # "psi" or "theta"
    label: tuple
    value: DiffForm


def build_kernel(ctx: CharacterContext, p: int, f_coeffs: Sequence[Mapping[int, Any]] = (),
                 mode_cutoff: int | None = None) -> ZhuKernel:
    work = ctx.order + p - 1
    cfg = KernelConfig(ctx.genus, p, work, mode_cutoff, tuple(f_coeffs))
    return ZhuKernel(cfg, ctx.centers())


def psi_coefficient(ctx: CharacterContext, kernel: ZhuKernel, x: str, y: str, j: int) -> DiffForm:
    """d^{(0,j)} Psi_p(x, y) dx^p dy^{1-p} dy^j."""
    psi = kernel.psi_full(ctx.value(x), ctx.value(y), j, (x, y))
    return psi * DiffForm(TruncatedSeries.one(ctx.genus, ctx.order), {y: j})


def boundary_terms(ctx: CharacterContext, kernel: ZhuKernel, u: FockState, x: str,
                   insertions: Insertions) -> list[tuple[tuple[int, int], DiffForm]]:
    """The nonzero products Theta_a(x; l) O_a(u; v, y; l)."""
    p = kernel.p
    ct = kernel.chi_theta(ctx.value(x), x)
    work = ctx.order + p - 1
    deg = form_degrees(insertions)
    out = []
    for a in range(1, ctx.genus + 1):
        for l in range(2 * p - 1):
            theta = ct.Theta[(a, l)]
            if theta.body.is_zero():
                continue
            o = o_entry(ctx, u, insertions, a, l, work)
            if o.is_zero():
                continue
            out.append(((a, l), theta * DiffForm(o, deg)))
    return out


def zhu_reduce(ctx: CharacterContext, u: FockState, x: str, insertions: Insertions,
               f_coeffs: Sequence[Mapping[int, Any]] = (), kernel: ZhuKernel | None = None,
               collect: list | None = None) -> NPointResult:
    """Right-hand side of the recursion as an (n+1)-point form in x and the y_k.

    ``collect``, if given, receives every individual term with its form
    degrees, which are checked against dx^p prod dy_k^{wt v_k}.
    """
    p = _require_quasiprimary(ctx.voa, u)
    insertions = tuple((s, c) for s, c in insertions)
    if x in {c for _, c in insertions}:
        raise DomainError(f"x coordinate {x!r} coincides with an insertion")
    if kernel is None:
        kernel = build_kernel(ctx, p, f_coeffs)
    elif kernel.p != p or kernel.cfg.order < ctx.order + p - 1 or kernel.genus != ctx.genus:
        raise DomainError("kernel configuration does not match the context")
    T = ctx.order
    target = {x: p, **form_degrees(insertions)}
    total = TruncatedSeries.zero(ctx.genus, T)

    def add(kind, label, term):
        nonlocal total
        if term.degree_map != target:
            raise ConsistencyError(f"form degrees {term.degree_map} != {target} for {kind} {label}")
        if collect is not None:
            collect.append(ReductionTerm(kind, label, term))
        total = total + term.body

    for k, j, s in reduction_terms(ctx, u, insertions):
        yname = insertions[k][1]
        z = replaced(insertions, k, s)
        add("psi", (k, j), psi_coefficient(ctx, kernel, x, yname, j) * DiffForm(genus_sum(ctx, z), form_degrees(z)))
    for label, term in boundary_terms(ctx, kernel, u, x, insertions):
        add("theta", label, term)

    if total.order < T:
        raise ConsistencyError(f"reduction only exact through {total.order} < {T}")
    total = total.truncate(T).require_nonnegative("reduction")
    full = ((u, x),) + insertions
    return NPointResult(DiffForm(total, target), full)


def direct_npoint(ctx: CharacterContext, u: FockState, x: str, insertions: Insertions) -> NPointResult:
    """Brute-force F(u, x; v, y) from the dual-basis sum."""
    full = ((u, x),) + tuple(insertions)
    body = genus_sum(ctx, full)
    return NPointResult(DiffForm(body, form_degrees(full)), full)


@dataclass
class ReductionReport:
    equal: bool
    order: Fraction
    lhs: NPointResult
    rhs: NPointResult
    first_discrepancy: tuple | None = None
    detail: str = ""

    def summary(self) -> str:
        if self.equal:
            return f"equal through rho-order {self.order}"
        return f"first discrepancy at rho^{self.first_discrepancy}: {self.detail}"


def compare_series(lhs: TruncatedSeries, rhs: TruncatedSeries) -> tuple | None:
    return lhs.first_difference(rhs)


def verify_reduction(ctx: CharacterContext, u: FockState, x: str, insertions: Insertions,
                     f_coeffs: Sequence[Mapping[int, Any]] = (), rhs: NPointResult | None = None) -> ReductionReport:
    lhs = direct_npoint(ctx, u, x, insertions)
    if rhs is None:
        rhs = zhu_reduce(ctx, u, x, insertions, f_coeffs)
    diff = compare_series(lhs.value.body, rhs.value.body)
    degrees_ok = lhs.value.degrees == rhs.value.degrees
    equal = diff is None and degrees_ok
    detail = ""
    if diff is not None:
        detail = f"lhs {lhs.value.body.coefficient(diff)} vs rhs {rhs.value.body.coefficient(diff)}"
    elif not degrees_ok:
        detail = f"form degrees {lhs.value.degrees} vs {rhs.value.degrees}"
    return ReductionReport(equal, ctx.order, lhs, rhs, diff, detail)


def one_point_boundary(ctx: CharacterContext, u: FockState, x: str,
                       f_coeffs: Sequence[Mapping[int, Any]] = ()) -> TruncatedSeries:
    """sum_a Theta_a(x) . O_a(u): the full right-hand side when n = 0."""
    return zhu_reduce(ctx, u, x, (), f_coeffs).value.body


# ---------------------------------------------------------------------------
# genus-one q-coordinates


def q_expansion(series: TruncatedSeries, W_plus: Any, W_minus: Any, order: int) -> list[Fraction]:
    """Substitute w_{+-1}, rho from fixed points (W_{+-1}, q) and expand in q.

    The coefficients of ``series`` must be rational functions of w1, wm1
    (or rationals).  Returns the q-coefficients 0..order; rho is O(q), so
    the input must be exact through rho-order >= order.
    """
    if series.genus != 1:
        raise DomainError("q-expansion is implemented for genus one")
    if series.order < order:
        raise DomainError(f"series exact only through rho^{series.order}")
    Wp, Wm = to_fraction(W_plus), to_fraction(W_minus)
    # work with truncated power series in q over Q
    def mul(a, b):
        out = [Fraction(0)] * (order + 1)
        for i, x in enumerate(a):
            if x:
                for j in range(order + 1 - i):
                    out[i + j] += x * b[j]
        return out

    def inv(a):
        if not a[0]:
            raise DomainError("series in q is not invertible")
        out = [Fraction(0)] * (order + 1)
        out[0] = 1 / a[0]
        for n in range(1, order + 1):
            out[n] = -sum(a[i] * out[n - i] for i in range(1, n + 1)) / a[0]
        return out

    one_minus_q = [Fraction(1), Fraction(-1)] + [Fraction(0)] * (order - 1)
    inv_1mq = inv(one_minus_q[: order + 1])
    qs = [Fraction(0), Fraction(1)] + [Fraction(0)] * (order - 1)
    qs = qs[: order + 1]
    # w1 = (W1 - q W-1)/(1-q), wm1 = (W-1 - q W1)/(1-q), rho = -q (W1-W-1)^2/(1-q)^2
    w1 = mul([Wp, -Wm] + [Fraction(0)] * (order - 1), inv_1mq)[: order + 1]
    wm1 = mul([Wm, -Wp] + [Fraction(0)] * (order - 1), inv_1mq)[: order + 1]
    rho = [-(Wp - Wm) ** 2 * c for c in mul(qs, mul(inv_1mq, inv_1mq))]

    def subst(coeff):
        if not isinstance(coeff, FracElement):
            c = to_fraction(coeff)
            return [c] + [Fraction(0)] * order
        names = [str(s) for s in coeff.field.symbols]
        vals = {"w1": w1, "wm1": wm1}

        def poly_series(poly):
            total = [Fraction(0)] * (order + 1)
            for monom, c in poly.terms():
                t = [Fraction(int(c.numerator), int(c.denominator))] + [Fraction(0)] * order
                for name, e in zip(names, monom):
                    if e:
                        if name not in vals:
                            raise DomainError(f"unexpected variable {name} in genus-one series")
                        for _ in range(e):
                            t = mul(t, vals[name])
                total = [x + y for x, y in zip(total, t)]
            return total

        return mul(poly_series(coeff.numer), inv(poly_series(coeff.denom)))

    result = [Fraction(0)] * (order + 1)
    for (e,), c in series.items2():
        if e % 2:
            raise DomainError("half-integer rho powers have no q-expansion here")
        k = e // 2
        if k > order:
            continue
        rk = [Fraction(1)] + [Fraction(0)] * order
        for _ in range(k):
            rk = mul(rk, rho)
        term = mul(subst(c), rk)
        result = [x + y for x, y in zip(result, term)]
    return result
