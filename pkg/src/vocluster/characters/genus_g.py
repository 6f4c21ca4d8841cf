"""Genus-g partition and n-point functions as truncated rho-series.

Sewing g handles onto the sphere inserts, for every handle a, a basis vector
b_a at w_a and its rescaled dual b_{-a} = rho_a^{wt b_a} bbar_a at w_{-a}.
The genus-g function is the sum over all such choices of genus-zero
correlators, truncated at total weight L = floor(T).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from ..exactalg import (
    ConfigurationError,
    DiffForm,
    RationalFunctionField,
    TruncatedSeries,
    _double,
)
from ..voa import FockState, HeisenbergVOA
from ..zhukernel import ModeIndexedVector, ZhuKernel, handle_indices
from .genus0 import PropagatorSum, accumulate

Insertions = Sequence[tuple[FockState, str]]


def w_name(a: int) -> str:
    return f"w{a}" if a > 0 else f"wm{-a}"


def handle_names(genus: int) -> list[str]:
    return [w_name(a) for a in handle_indices(genus)]


@dataclass(eq=False)
class CharacterContext:
    """Read-only data shared by every genus-g computation.

    ``point`` assigns a value to each centre name (``w1``, ``wm1``, ...) and
    to each insertion coordinate.  Values are Fractions or elements of one
    rational function field.
    """

    voa: HeisenbergVOA
    genus: int
    order: Fraction
    point: Mapping[str, Any]
    cutoff: int | None = None
    field: RationalFunctionField | None = None

    def __post_init__(self):
        self.order = Fraction(self.order)
        _double(self.order)
        if self.genus < 1:
            raise ConfigurationError("genus must be positive")
        if self.order < 0:
            raise ConfigurationError("order must be nonnegative")
        L = int(self.order) if self.cutoff is None else self.cutoff
        if L < int(self.order):
            raise ConfigurationError(f"weight cutoff {L} is below the order {self.order}")
        if L > self.voa.cutoff:
            raise ConfigurationError(f"weight cutoff {L} exceeds the VOA cutoff {self.voa.cutoff}")
        self.cutoff = L
        for n in handle_names(self.genus):
            if n not in self.point:
                raise ConfigurationError(f"point does not assign centre {n}")

    @property
    def symbolic(self) -> bool:
        return self.field is not None

    def centers(self) -> dict[int, Any]:
        return {a: self.point[w_name(a)] for a in handle_indices(self.genus)}

    def value(self, name: str) -> Any:
        try:
            return self.point[name]
        except KeyError:
            raise ConfigurationError(f"point does not assign {name!r}") from None

    def with_order(self, order: Any) -> "CharacterContext":
        order = Fraction(order)
        L = max(self.cutoff, int(order))
        return CharacterContext(self.voa, self.genus, order, self.point, L, self.field)

    def name_order(self, insertions: Insertions) -> list[str]:
        return handle_names(self.genus) + [n for _, n in insertions]


def symbolic_context(voa: HeisenbergVOA, genus: int, order: Any, coords: Iterable[str] = (),
                     cutoff: int | None = None) -> CharacterContext:
    names = handle_names(genus) + list(coords)
    fld = RationalFunctionField(names)
    return CharacterContext(voa, genus, Fraction(order), fld.gens(), cutoff, fld)


def random_point(names: Iterable[str], rng: random.Random, spread: int = 60) -> dict[str, Fraction]:
    """Distinct nonzero random rationals, one per name."""
    out: dict[str, Fraction] = {}
    used: set[Fraction] = set()
    for n in names:
        while True:
            v = Fraction(rng.randint(-spread, spread), rng.randint(1, 7))
            if v and v not in used:
                break
        used.add(v)
        out[n] = v
    return out


def random_context(voa: HeisenbergVOA, genus: int, order: Any, coords: Iterable[str], rng: random.Random,
                   cutoff: int | None = None) -> CharacterContext:
    names = handle_names(genus) + list(coords)
    return CharacterContext(voa, genus, Fraction(order), random_point(names, rng), cutoff)


def level_vectors(genus: int, total: int) -> Iterator[tuple[int, ...]]:
    """All level tuples (n_1..n_g) with n_a >= 0 and sum <= total."""
    if genus == 0:
        yield ()
        return
    for n in range(total + 1):
        for rest in level_vectors(genus - 1, total - n):
            yield (n,) + rest


# ---------------------------------------------------------------------------
# module decompositions

BasisFn = Callable[[HeisenbergVOA, Any, int], list]


@dataclass(frozen=True)
class ModuleDecomposition:
    """A splitting V = sum_alpha W_alpha given by dual-basis pairs per level."""

    name: str
    labels: tuple
    pairs: BasisFn


def _trivial_pairs(voa: HeisenbergVOA, label: Any, level: int) -> list:
    return voa.dual_basis(level)


TRIVIAL = ModuleDecomposition("trivial", ("V",), _trivial_pairs)
_DECOMPOSITIONS: dict[str, ModuleDecomposition] = {"trivial": TRIVIAL}


def register_decomposition(dec: ModuleDecomposition) -> None:
    _DECOMPOSITIONS[dec.name] = dec


def get_decomposition(name: str | ModuleDecomposition) -> ModuleDecomposition:
    if isinstance(name, ModuleDecomposition):
        return name
    try:
        return _DECOMPOSITIONS[name]
    except KeyError:
        raise ConfigurationError(f"unknown module decomposition {name!r}") from None


# ---------------------------------------------------------------------------
# basis sums


@dataclass(frozen=True)
class SlotOperator:
    """Apply u(mode) to the handle state at index ``handle`` (a in I)."""

    handle: int
    state: FockState
    mode: int


def genus_sum(ctx: CharacterContext, insertions: Insertions, order: Any | None = None,
              slot: SlotOperator | None = None,
              restriction: tuple[ModuleDecomposition, Sequence[Any]] | None = None) -> TruncatedSeries:
    """sum_{b_+} Z0(insertions; b_{-1}, w_{-1}; b_1, w_1; ...) through rho-order ``order``."""
    order = ctx.order if order is None else Fraction(order)
    o2 = _double(order)
    L = int(order)
    if L > ctx.voa.cutoff:
        raise ConfigurationError(f"order {order} needs weights beyond the VOA cutoff")
    for _, name in insertions:
        ctx.value(name)
    names = ctx.name_order(insertions)
    if len(set(names)) != len(names):
        raise ConfigurationError(f"insertion coordinates collide with {names}")
    voa = ctx.voa
    terms: dict[tuple[int, ...], Any] = {}
    for levels in level_vectors(ctx.genus, L):
        per_handle = []
        for a, n in enumerate(levels, 1):
            if restriction is None:
                per_handle.append(voa.dual_basis(n))
            else:
                dec, labels = restriction
                per_handle.append(dec.pairs(voa, labels[a - 1], n))
        acc = PropagatorSum(names)
        for combo in product(*per_handle):
            ins = list(insertions)
            for a, (b, bbar) in enumerate(combo, 1):
                if slot is not None and slot.handle == a:
                    b = voa.mode_action(slot.state, slot.mode, b)
                if slot is not None and slot.handle == -a:
                    bbar = voa.mode_action(slot.state, slot.mode, bbar)
                ins.append((bbar, w_name(-a)))
                ins.append((b, w_name(a)))
            accumulate(acc, ins)
        val = acc.evaluate(ctx.point)
        if val:
            terms[tuple(2 * n for n in levels)] = val
    return TruncatedSeries._raw(ctx.genus, o2, terms)


def form_degrees(insertions: Insertions) -> dict[str, int]:
    deg: dict[str, int] = {}
    for s, name in insertions:
        if s.is_zero():
            continue
        deg[name] = s.weight
    return deg


@dataclass(frozen=True)
class NPointResult:
    value: DiffForm
    insertions: tuple[tuple[FockState, str], ...]

    def form_weights(self) -> dict[str, int]:
        return self.value.degree_map

    def to_json(self) -> dict:
        return {
            "insertions": [{"state": s.to_json(), "coord": c} for s, c in self.insertions],
            "value": self.value.to_json(),
        }


def genus_g_partition(ctx: CharacterContext) -> TruncatedSeries:
    return genus_sum(ctx, [])


def genus_g_npoint(ctx: CharacterContext, insertions: Insertions) -> NPointResult:
    insertions = tuple((s, c) for s, c in insertions)
    body = genus_sum(ctx, insertions)
    return NPointResult(DiffForm(body, form_degrees(insertions)), insertions)


def module_npoint(ctx: CharacterContext, decomposition: str | ModuleDecomposition, alpha: Sequence[Any],
                  insertions: Insertions) -> NPointResult:
    dec = get_decomposition(decomposition)
    if len(alpha) != ctx.genus:
        raise ConfigurationError(f"need one module label per handle, got {len(alpha)}")
    for lab in alpha:
        if lab not in dec.labels:
            raise ConfigurationError(f"{lab!r} is not a module of decomposition {dec.name!r}")
    insertions = tuple(insertions)
    body = genus_sum(ctx, insertions, restriction=(dec, tuple(alpha)))
    return NPointResult(DiffForm(body, form_degrees(insertions)), insertions)


def module_sum(ctx: CharacterContext, decomposition: str | ModuleDecomposition, insertions: Insertions) -> NPointResult:
    """sum over all label vectors alpha of module_npoint."""
    dec = get_decomposition(decomposition)
    insertions = tuple(insertions)
    total = TruncatedSeries.zero(ctx.genus, ctx.order)
    for alpha in product(dec.labels, repeat=ctx.genus):
        total = total + module_npoint(ctx, dec, alpha, insertions).value.body
    return NPointResult(DiffForm(total, form_degrees(insertions)), insertions)


# ---------------------------------------------------------------------------
# Zhu vectors


def _require_quasiprimary(voa: HeisenbergVOA, u: FockState) -> int:
    from ..exactalg import DomainError

    if u.is_zero() or not voa.is_quasiprimary(u):
        raise DomainError(f"{u} is not a nonzero homogeneous quasiprimary state")
    return u.weight


def X_entry(ctx: CharacterContext, u: FockState, insertions: Insertions, a: int, m: int,
            order: Any | None = None) -> TruncatedSeries:
    """X_a(m) = rho_a^{-m/2} sum_{b_+} Z0(...; u(m) b_a, w_a; ...)."""
    s = genus_sum(ctx, insertions, order, SlotOperator(a, u, m))
    shift = [0] * ctx.genus
    shift[abs(a) - 1] = -m
    return s.mul_monomial2(tuple(shift))


def X_vector(ctx: CharacterContext, u: FockState, insertions: Insertions, max_mode: int | None = None,
             order: Any | None = None) -> ModeIndexedVector:
    p = _require_quasiprimary(ctx.voa, u)
    order = ctx.order if order is None else Fraction(order)
    M = 2 * p - 2 if max_mode is None else max_mode
    entries = {(a, m): X_entry(ctx, u, insertions, a, m, order)
               for a in handle_indices(ctx.genus) for m in range(M + 1)}
    return ModeIndexedVector(ctx.genus, order, entries, M)


def o_entry(ctx: CharacterContext, u: FockState, insertions: Insertions, a: int, l: int,
            order: Any | None = None) -> TruncatedSeries:
    """o_a(l) = rho_a^{l/2} X_a(l), i.e. the basis sum with u(l) at w_a."""
    return genus_sum(ctx, insertions, order, SlotOperator(a, u, l))


def o_vector(ctx: CharacterContext, u: FockState, insertions: Insertions, order: Any | None = None,
             all_handles: bool = False) -> dict[tuple[int, int], DiffForm]:
    """O_a(u; v, y; l) = o_a(l) prod dy_k^{wt v_k} for 0 <= l <= 2p-2."""
    p = _require_quasiprimary(ctx.voa, u)
    handles = handle_indices(ctx.genus) if all_handles else range(1, ctx.genus + 1)
    deg = form_degrees(insertions)
    return {(a, l): DiffForm(o_entry(ctx, u, insertions, a, l, order), deg)
            for a in handles for l in range(2 * p - 1)}


def replaced(insertions: Insertions, k: int, state: FockState) -> list[tuple[FockState, str]]:
    out = list(insertions)
    out[k] = (state, out[k][1])
    return out


def reduction_terms(ctx: CharacterContext, u: FockState, insertions: Insertions) -> list[tuple[int, int, FockState]]:
    """(k, j, u(j)v_k) for every nonzero u(j)v_k with j >= 0."""
    out = []
    p = u.weight
    for k, (v, _) in enumerate(insertions):
        if v.is_zero():
            continue
        for j in range(0, p + max(v.weights())):
            s = ctx.voa.mode_action(u, j, v)
            if s:
                out.append((k, j, s))
    return out


def G_vector(ctx: CharacterContext, u: FockState, insertions: Insertions, kernel: ZhuKernel) -> ModeIndexedVector:
    """G_a(m) = sum_k sum_j d_k^{(j)} q_a(y_k; m) Z(...; u(j)v_k, y_k; ...)."""
    _require_quasiprimary(ctx.voa, u)
    entries: dict[tuple[int, int], TruncatedSeries] = {}
    for k, j, s in reduction_terms(ctx, u, insertions):
        y = ctx.value(insertions[k][1])
        z = genus_sum(ctx, replaced(insertions, k, s))
        for a in handle_indices(ctx.genus):
            for m in range(kernel.M + 1):
                q = kernel.q_entry(a, m, y, j)
                if q:
                    t = q * z
                    entries[(a, m)] = entries[(a, m)] + t if (a, m) in entries else t
    return ModeIndexedVector(ctx.genus, ctx.order, entries, kernel.M)
