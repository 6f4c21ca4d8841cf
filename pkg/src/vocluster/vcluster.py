"""Vertex operator cluster seeds (v, Y(v, y), F_n) and their mutations.

A seed holds n states at named coordinates together with the genus-g
character of those insertions.  A mutation is specified by a mutator state
u, a mode, a direction and three named maps acting on states (F), on
vertex operators (G) and inside the character reduction (H).  Binding the
coefficient family to the Zhu kernel gives the Schottky instantiation, in
which the mutated character is exactly the reduction formula.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .characters.genus_g import (
    CharacterContext,
    NPointResult,
    _require_quasiprimary,
    form_degrees,
    genus_g_npoint,
    genus_sum,
    handle_names,
)
from .characters.zhu import boundary_terms, build_kernel, direct_npoint, psi_coefficient
from .exactalg import (
    ConfigurationError,
    ConsistencyError,
    DiffForm,
    DomainError,
    TruncatedSeries,
    to_fraction,
)
from .voa import FockState, HeisenbergVOA, parse_state
from .zhukernel import ZhuKernel

# a state map receives (voa, u, m, v, xi) and returns a state
StateMap = Callable[[HeisenbergVOA, FockState, int, FockState, int], FockState]

_MAPS: dict[str, StateMap] = {}


def register_map(name: str, fn: StateMap) -> None:
    if name in _MAPS:
        raise ConfigurationError(f"map {name!r} is already registered")
    _MAPS[name] = fn


def get_map(name: str) -> StateMap:
    try:
        return _MAPS[name]
    except KeyError:
        raise ConfigurationError(f"unregistered map {name!r}; known: {sorted(_MAPS)}") from None


def registered_maps() -> list[str]:
    return sorted(_MAPS)


register_map("mode", lambda voa, u, m, v, xi: voa.mode_action(u, m, v))
register_map("vacuum", lambda voa, u, m, v, xi: voa.mode_action(u, -1, v) * xi)
register_map("translation", lambda voa, u, m, v, xi: voa.mode_action(voa.omega, 0, v))


@dataclass(frozen=True)
class OperatorRecord:
    """Y(state, coord); linearity lets the state carry every scalar."""

    state: FockState
    coord: str


@dataclass(frozen=True)
class VSeed:
    ctx: CharacterContext
    states: tuple[FockState, ...]
    coords: tuple[str, ...]
    character: NPointResult

    @property
    def n(self) -> int:
        return len(self.states)

    def operators(self) -> tuple[OperatorRecord, ...]:
        return tuple(OperatorRecord(s, c) for s, c in zip(self.states, self.coords))

    def insertions(self) -> tuple[tuple[FockState, str], ...]:
        return tuple(zip(self.states, self.coords))

    def to_json(self) -> dict:
        return seed_to_json(self)


def make_seed(ctx: CharacterContext, states: Sequence[FockState], coords: Sequence[str]) -> VSeed:
    if len(states) != len(coords):
        raise ConfigurationError("states and coordinates differ in length")
    if len(set(coords)) != len(coords):
        raise ConfigurationError(f"repeated coordinates {list(coords)}")
    ins = tuple(zip(states, coords))
    return VSeed(ctx, tuple(states), tuple(coords), genus_g_npoint(ctx, ins))


# ---------------------------------------------------------------------------
# mutation specs

CoefficientFamily = Callable[[CharacterContext, int, int, str, str], "DiffForm | None"]
BoundaryTerm = Callable[[CharacterContext, FockState, str, tuple], DiffForm]


@dataclass(frozen=True)
class MutationSpec:
    """Mutation data.  ``direction`` is a 1-based index or "all"."""

    u: FockState
    mode: int = -1
    direction: int | str = "all"
    F: str = "mode"
    G: str = "mode"
    H: str = "mode"
    xi: int = 1
    f: CoefficientFamily | None = None
    ftilde: BoundaryTerm | None = None
    label: str = ""

    def __post_init__(self):
        if self.xi * self.xi != 1:
            raise ConfigurationError(f"xi must satisfy xi^2 = 1, got {self.xi}")
        if self.direction != "all" and not isinstance(self.direction, int):
            raise ConfigurationError(f"direction must be an index or 'all', got {self.direction!r}")
        for name in (self.F, self.G, self.H):
            get_map(name)

    def directions(self, n: int) -> list[int]:
        if self.direction == "all":
            return list(range(1, n + 1))
        if not 1 <= self.direction <= n:
            raise ConfigurationError(f"direction {self.direction} out of range 1..{n}")
        return [self.direction]


def vacuum_spec(voa: HeisenbergVOA, xi: int = 1, direction: int | str = "all") -> MutationSpec:
    """F = G = xi 1_V(-1), with the character mutation bound to the kernel."""
    spec = MutationSpec(voa.vacuum, -1, direction, "vacuum", "vacuum", "mode", xi, label="vacuum")
    return schottky_instantiation(spec)


def mutate_states(seed: VSeed, spec: MutationSpec) -> tuple[FockState, ...]:
    fn = get_map(spec.F)
    out = list(seed.states)
    for k in spec.directions(seed.n):
        out[k - 1] = fn(seed.ctx.voa, spec.u, spec.mode, out[k - 1], spec.xi)
    return tuple(out)


def mutate_operators(seed: VSeed, spec: MutationSpec) -> tuple[OperatorRecord, ...]:
    fn = get_map(spec.G)
    out = list(seed.operators())
    for k in spec.directions(seed.n):
        rec = out[k - 1]
        out[k - 1] = OperatorRecord(fn(seed.ctx.voa, spec.u, spec.mode, rec.state, spec.xi), rec.coord)
    return tuple(out)


def _mode_bound(u: FockState, v: FockState) -> int:
    # u(m)v = 0 once m >= wt u + wt v
    return max(u.weights()) + max(v.weights())


def mutate_character(seed: VSeed, spec: MutationSpec, x: str) -> NPointResult:
    """sum_k sum_{m>=0} f(m,k,x,y) F(...; H_k(u(m)) v_k, y_k; ...) + Ftilde(u, x; v, y)."""
    if spec.f is None or spec.ftilde is None:
        raise ConfigurationError("character mutation needs a coefficient family and a boundary term")
    ctx = seed.ctx
    if x in seed.coords or x in handle_names(ctx.genus):
        raise DomainError(f"x coordinate {x!r} coincides with an existing point")
    ctx.value(x)
    h = get_map(spec.H)
    ins = seed.insertions()
    T = ctx.order
    total = TruncatedSeries.zero(ctx.genus, T)
    degrees = None
    for k in range(1, seed.n + 1):
        v = seed.states[k - 1]
        if v.is_zero():
            continue
        for m in range(_mode_bound(spec.u, v)):
            s = h(ctx.voa, spec.u, m, v, spec.xi)
            if s.is_zero():
                continue
            coeff = spec.f(ctx, m, k, x, seed.coords[k - 1])
            if coeff is None:
                continue
            rest = list(ins)
            rest[k - 1] = (s, rest[k - 1][1])
            term = coeff * DiffForm(genus_sum(ctx, rest), form_degrees(rest))
            degrees = _same_degrees(degrees, term)
            total = total + term.body
    tail = spec.ftilde(ctx, spec.u, x, ins)
    degrees = _same_degrees(degrees, tail)
    total = total + tail.body
    if total.order < T:
        raise ConsistencyError(f"mutated character only exact through {total.order} < {T}")
    total = total.truncate(T).require_nonnegative("mutated character")
    return NPointResult(DiffForm(total, degrees), ((spec.u, x),) + ins)


def _same_degrees(prev, term: DiffForm):
    if prev is not None and term.degree_map != prev:
        raise ConsistencyError(f"inconsistent form degrees {term.degree_map} vs {prev}")
    return term.degree_map


def schottky_instantiation(spec: MutationSpec, f_coeffs: Sequence[Mapping[int, Any]] = (),
                           mode_cutoff: int | None = None) -> MutationSpec:
    """Bind f = d^{(0,j)} Psi_p(x, y_k) dy_k^j and Ftilde = sum_a Theta_a O_a.

    For u = 1_V (p = 0) no mode u(m), m >= 0, survives and Ftilde is the
    (n+1)-point function with the vacuum at x, which equals F_n.
    """
    if spec.H != "mode":
        raise ConfigurationError("the Schottky instantiation uses H_k(u(m)) = u(m)")
    u = spec.u
    is_vacuum = u == FockState.vacuum()
    kernels: dict[tuple, ZhuKernel] = {}

    def kernel_for(ctx: CharacterContext) -> ZhuKernel:
        key = (ctx.genus, ctx.order, tuple(sorted(ctx.centers().items())))
        if key not in kernels:
            p = _require_quasiprimary(ctx.voa, u)
            kernels[key] = build_kernel(ctx, p, f_coeffs, mode_cutoff)
        return kernels[key]

    def f(ctx, m, k, x, y):
        if is_vacuum:
            return None
        return psi_coefficient(ctx, kernel_for(ctx), x, y, m)

    def ftilde(ctx, u_, x, ins):
        if is_vacuum:
            return direct_npoint(ctx, u_, x, ins).value
        p = kernel_for(ctx).p
        target = {x: p, **form_degrees(ins)}
        total = TruncatedSeries.zero(ctx.genus, ctx.order)
        for _, term in boundary_terms(ctx, kernel_for(ctx), u_, x, ins):
            total = total + term.body
        return DiffForm(total, target)

    return replace(spec, f=f, ftilde=ftilde, label=spec.label or "schottky")


def mutate_seed(seed: VSeed, spec: MutationSpec, x: str) -> VSeed:
    """Apply all three layers; the character keeps its recorded insertions."""
    states = mutate_states(seed, spec)
    ch = mutate_character(seed, spec, x)
    return VSeed(seed.ctx, states, seed.coords, NPointResult(ch.value, seed.insertions()))


# ---------------------------------------------------------------------------
# checks


@dataclass
class InvolutionReport:
    ok: bool
    states_ok: bool
    operators_ok: bool
    character_ok: bool
    character_hash: str
    detail: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "states": self.states_ok, "operators": self.operators_ok,
                "character": self.character_ok, "character_hash": self.character_hash, "detail": self.detail}


def extend_point(ctx: CharacterContext, name: str, value: Any) -> CharacterContext:
    if name in ctx.point:
        return ctx
    if ctx.symbolic:
        raise ConfigurationError(f"symbolic context has no variable {name!r}")
    point = dict(ctx.point)
    point[name] = to_fraction(value)
    return CharacterContext(ctx.voa, ctx.genus, ctx.order, point, ctx.cutoff, ctx.field)


def fresh_value(ctx: CharacterContext) -> Fraction:
    used = {to_fraction(v) for v in ctx.point.values()}
    c = Fraction(101, 7)
    while c in used:
        c += 1
    return c


def vacuum_involution_check(seed: VSeed, xi: int = 1, direction: int | str = "all", x: str = "x") -> InvolutionReport:
    """mu o mu = Id on (v, Y, F) for the vacuum mutation."""
    if x not in seed.ctx.point:
        seed = VSeed(extend_point(seed.ctx, x, fresh_value(seed.ctx)), seed.states, seed.coords, seed.character)
    spec = vacuum_spec(seed.ctx.voa, xi, direction if seed.n else "all")
    once = mutate_seed(seed, spec, x)
    ops_once = mutate_operators(seed, spec)
    twice = mutate_seed(once, spec, x)
    ops_twice = mutate_operators(once, spec)
    states_ok = twice.states == seed.states
    operators_ok = ops_twice == seed.operators() and ops_once == once.operators()
    h0 = seed.character.value.content_hash()
    character_ok = (once.character.value.content_hash() == h0 and twice.character.value.content_hash() == h0)
    detail = []
    if not states_ok:
        detail.append("states differ after two mutations")
    if not operators_ok:
        detail.append("operators differ")
    if not character_ok:
        detail.append("character changed")
    return InvolutionReport(states_ok and operators_ok and character_ok, states_ok, operators_ok,
                            character_ok, h0, "; ".join(detail))


def double_mutation_report(seed: VSeed, spec: MutationSpec) -> dict:
    """mu o mu on states and operators for a general spec; reported, not required."""
    once = VSeed(seed.ctx, mutate_states(seed, spec), seed.coords, seed.character)
    twice = mutate_states(once, spec)
    return {"states_restored": twice == seed.states,
            "operators_restored": mutate_operators(once, spec) == seed.operators()}


def recompute_discrepancy(seed: VSeed) -> dict:
    """Compare the stored character with the one recomputed from the stored states."""
    fresh = genus_g_npoint(seed.ctx, seed.insertions())
    stored = seed.character.value
    same = fresh.value.content_hash() == stored.content_hash()
    out: dict[str, Any] = {"consistent": same}
    if not same:
        diff = stored.body.first_difference(fresh.value.body)
        out["first_difference"] = None if diff is None else [str(e) for e in diff]
        out["degrees"] = [stored.degree_map, fresh.value.degree_map]
    return out


# ---------------------------------------------------------------------------
# the union over n


@dataclass
class SeedSpace:
    n: int
    ctx: CharacterContext
    specs: list[MutationSpec] = field(default_factory=list)

    def seed(self, states: Sequence[FockState], coords: Sequence[str] | None = None) -> VSeed:
        if len(states) != self.n:
            raise ConfigurationError(f"seed space {self.n} needs {self.n} states")
        coords = tuple(coords) if coords is not None else tuple(f"y{i}" for i in range(1, self.n + 1))
        return make_seed(self.ctx, states, coords)


def algebra_registry(ctx: CharacterContext, max_n: int, specs: Sequence[MutationSpec] = ()) -> dict[int, SeedSpace]:
    if max_n < 0:
        raise ConfigurationError("max_n must be nonnegative")
    return {n: SeedSpace(n, ctx, list(specs)) for n in range(max_n + 1)}


def lift(seed: VSeed, spec: MutationSpec, x: str) -> VSeed:
    """Read the mutated character as an (n+1)-point seed with (u, x) prepended."""
    ch = mutate_character(seed, spec, x)
    states = (spec.u,) + seed.states
    coords = (x,) + seed.coords
    return VSeed(seed.ctx, states, coords, ch)


# ---------------------------------------------------------------------------
# serialization


def seed_to_json(seed: VSeed) -> dict:
    ctx = seed.ctx
    if ctx.symbolic:
        point = None
    else:
        point = {k: str(to_fraction(v)) for k, v in sorted(ctx.point.items())}
    return {
        "genus": ctx.genus,
        "order": str(ctx.order),
        "cutoff": ctx.cutoff,
        "states": [s.to_json() for s in seed.states],
        "coords": list(seed.coords),
        "point": point,
        "character_hash": seed.character.value.content_hash(),
    }


def seed_from_json(data: Mapping, voa: HeisenbergVOA | None = None, verify_hash: bool = True) -> VSeed:
    """Rebuild a seed; the character is recomputed and checked against the stored hash."""
    try:
        genus = int(data["genus"])
        order = Fraction(str(data["order"]))
        coords = [str(c) for c in data["coords"]]
        states = [parse_state(s) if isinstance(s, str) else FockState.from_json(s) for s in data["states"]]
        raw_point = data.get("point") or {}
        point = {k: Fraction(str(v)) for k, v in raw_point.items()}
        cutoff = data.get("cutoff")
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"malformed seed: {exc}") from exc
    voa = voa or HeisenbergVOA(cutoff=max(int(order), cutoff or 0) + 2)
    ctx = CharacterContext(voa, genus, order, point, cutoff)
    seed = make_seed(ctx, states, coords)
    stored = data.get("character_hash")
    if verify_hash and stored is not None and stored != seed.character.value.content_hash():
        raise ConsistencyError("stored character hash does not match the recomputed character")
    return seed


def spec_from_json(data: Mapping, voa: HeisenbergVOA) -> MutationSpec:
    try:
        u_raw = data.get("u", "vacuum")
        if u_raw in ("vacuum", "1", "|0>"):
            u = voa.vacuum
        else:
            u = parse_state(u_raw) if isinstance(u_raw, str) else FockState.from_json(u_raw)
        spec = MutationSpec(
            u,
            int(data.get("mode", -1)),
            data.get("direction", "all"),
            str(data.get("F", "mode")),
            str(data.get("G", "mode")),
            str(data.get("H", "mode")),
            int(data.get("xi", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed mutation spec: {exc}") from exc
    if data.get("schottky", True):
        spec = schottky_instantiation(spec)
    return spec


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
