"""Exact arithmetic kernel.

Coefficients are either :class:`fractions.Fraction` values or elements of a
sympy sparse rational function field (``FracElement``).  Formal series in
half-integer powers of the sewing parameters rho_1..rho_g are stored with
doubled exponents so every key is an integer tuple.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Any, Callable, Iterable, Mapping

from sympy import QQ, sympify
from sympy.polys.fields import FracElement
from sympy.polys.fields import field as _sympy_field

Rational = Fraction


class ExactAlgebraError(Exception):
    """Base class for errors raised by the exact arithmetic layer."""


class ConfigurationError(ExactAlgebraError, ValueError):
    """Inputs that do not fit together (genus, order, variables, names)."""


class NonInvertibleError(ExactAlgebraError, ZeroDivisionError):
    pass


class PoleError(ExactAlgebraError, ZeroDivisionError):
    """A denominator vanishes at the requested evaluation point."""


class ConsistencyError(ExactAlgebraError, RuntimeError):
    """An internal invariant was violated (a bug, not a user error)."""


class DomainError(ExactAlgebraError, ValueError):
    """An operation was applied outside its mathematical domain."""


# ---------------------------------------------------------------------------
# scalars


def binomial(n: int, k: int) -> int:
    """Generalized binomial coefficient, valid for negative ``n``."""
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= n - i
    return num // factorial(k)


def to_fraction(value: Any) -> Fraction:
    """Coerce ints, strings like ``"3/4"``, gmpy/sympy rationals to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, FracElement):
        if value.numer.is_ground and value.denom.is_ground:
            return _from_qq(value.numer.LC / value.denom.LC)
        raise TypeError(f"non-constant rational function {value} is not a rational")
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def is_zero(c: Any) -> bool:
    return not c


def rational_lt(a: Any, b: Any) -> bool:
    return to_fraction(a) < to_fraction(b)


def _as_qq(value: Any):
    f = to_fraction(value)
    return QQ(f.numerator, f.denominator)


def _from_qq(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


# ---------------------------------------------------------------------------
# rational functions


class RationalFunctionField:
    """The field Q(v_1, ..., v_k) over a declared tuple of variable names.

    Elements are sympy ``FracElement`` objects, which are kept in reduced
    form, so ``==`` decides equality.
    """

    def __init__(self, names: Iterable[str]):
        self.names = tuple(names)
        if not self.names:
            raise ConfigurationError("a rational function field needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise ConfigurationError(f"repeated variable names in {self.names}")
        built = _sympy_field(",".join(self.names), QQ)
        self.field = built[0]
        self._gens = dict(zip(self.names, built[1:]))

    def __getitem__(self, name: str) -> FracElement:
        try:
            return self._gens[name]
        except KeyError:
            raise ConfigurationError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._gens

    def gens(self) -> dict[str, FracElement]:
        return dict(self._gens)

    def __call__(self, value: Any) -> FracElement:
        if isinstance(value, FracElement):
            if value.field != self.field:
                raise ConfigurationError("element belongs to a different field")
            return value
        return self.field(_as_qq(value))

    def parse(self, text: str) -> FracElement:
        return self.field.from_expr(sympify(text))

    def __repr__(self) -> str:
        return f"RationalFunctionField({', '.join(self.names)})"


def variable_names(f: Any) -> tuple[str, ...]:
    if isinstance(f, FracElement):
        return tuple(str(s) for s in f.field.symbols)
    return ()


def divided_derivative(f: Any, var: Any, j: int) -> Any:
    """Return (1/j!) d^j f / d var^j.

    ``var`` is a generator of ``f``'s field or a variable name.  Rational
    constants have vanishing derivatives of positive order.
    """
    if j < 0:
        raise ConfigurationError("derivative order must be nonnegative")
    if j == 0:
        return f
    if not isinstance(f, FracElement):
        to_fraction(f)
        return Fraction(0)
    if isinstance(var, str):
        names = variable_names(f)
        if var not in names:
            raise ConfigurationError(f"{var!r} is not a variable of {names}")
        var = f.field.gens[names.index(var)]
    g = f
    for _ in range(j):
        g = g.diff(var)
        if not g:
            return Fraction(0)
    return g * Fraction(1, factorial(j))


def _eval_poly(poly, values) -> Any:
    total = QQ(0)
    for monom, coeff in poly.terms():
        term = coeff
        for v, e in zip(values, monom):
            if e:
                term *= v**e
        total += term
    return total


def evaluate_rational(f: Any, assignment: Mapping[str, Any]) -> Fraction:
    """Substitute rationals for every variable of ``f``."""
    if not isinstance(f, FracElement):
        return to_fraction(f)
    names = variable_names(f)
    values = []
    for name in names:
        if name not in assignment:
            # variables that do not occur are harmless
            values.append(None)
        else:
            values.append(_as_qq(assignment[name]))
    used = [False] * len(names)
    for poly in (f.numer, f.denom):
        for monom in poly.monoms():
            for i, e in enumerate(monom):
                if e:
                    used[i] = True
    missing = [n for n, u, v in zip(names, used, values) if u and v is None]
    if missing:
        raise ConfigurationError(f"assignment does not cover {missing}")
    values = [QQ(0) if v is None else v for v in values]
    den = _eval_poly(f.denom, values)
    if not den:
        raise PoleError(f"denominator of {f} vanishes at {dict(assignment)}")
    return _from_qq(_eval_poly(f.numer, values) / den)


def evaluate(obj: Any, assignment: Mapping[str, Any]) -> Any:
    """Evaluate a rational function, series or form at a rational point."""
    if isinstance(obj, TruncatedSeries):
        return obj.map_coefficients(lambda c: evaluate_rational(c, assignment))
    if isinstance(obj, DiffForm):
        return DiffForm(evaluate(obj.body, assignment), obj.degrees)
    return evaluate_rational(obj, assignment)


# ---------------------------------------------------------------------------
# truncated series

Exponent2 = tuple[int, ...]


def _double(value: Any) -> int:
    f = to_fraction(value)
    d = 2 * f
    if d.denominator != 1:
        raise ConfigurationError(f"{value} is not a half-integer")
    return int(d)


def _coeff_repr(c: Any) -> str:
    s = str(c)
    if isinstance(c, FracElement) and (len(c.numer.terms()) > 1 or not c.denom.is_ground):
        return f"({s})"
    return s


class TruncatedSeries:
    """Formal series sum_e c_e rho^e with e in (1/2 Z)^g, exact through ``order``.

    ``order`` is the total rho-degree through which the stored coefficients
    are exact; every stored term has total degree <= order.  Arithmetic
    tracks orders: a sum is exact through the smaller order, and a product
    ``a*b`` is exact through ``min(T_a + v_b, T_b + v_a)`` where ``v`` is the
    valuation.  Negative exponents may appear inside a computation; exported
    results are checked with :meth:`require_nonnegative`.
    """

    __slots__ = ("genus", "_order2", "_terms")

    def __init__(self, genus: int, order: Any, terms: Mapping | Iterable = ()):
        if not isinstance(genus, int) or genus < 1:
            raise ConfigurationError(f"genus must be a positive integer, got {genus!r}")
        self.genus = genus
        self._order2 = _double(order)
        items = terms.items() if isinstance(terms, Mapping) else terms
        store: dict[Exponent2, Any] = {}
        for exps, c in items:
            if isinstance(exps, (int, Fraction, str)):
                exps = (exps,)
            key = tuple(_double(e) for e in exps)
            if len(key) != genus:
                raise ConfigurationError(f"exponent {exps} does not have {genus} entries")
            if sum(key) > self._order2 or not c:
                continue
            store[key] = store.get(key, 0) + c
        self._terms = {k: v for k, v in store.items() if v}

    @classmethod
    def _raw(cls, genus: int, order2: int, terms: dict) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.genus = genus
        s._order2 = order2
        s._terms = terms
        return s

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, genus: int, order: Any) -> "TruncatedSeries":
        return cls(genus, order)

    @classmethod
    def constant(cls, genus: int, order: Any, c: Any = 1) -> "TruncatedSeries":
        return cls(genus, order, {(0,) * genus: c})

    @classmethod
    def one(cls, genus: int, order: Any) -> "TruncatedSeries":
        return cls.constant(genus, order, Fraction(1))

    @classmethod
    def monomial(cls, genus: int, order: Any, exps: Iterable[Any], c: Any = 1) -> "TruncatedSeries":
        return cls(genus, order, {tuple(exps): c})

    @classmethod
    def rho(cls, genus: int, order: Any, a: int, power: Any = 1, c: Any = 1) -> "TruncatedSeries":
        """c * rho_a^power for a handle index 1 <= a <= genus."""
        if not 1 <= a <= genus:
            raise ConfigurationError(f"handle {a} out of range for genus {genus}")
        exps = [0] * genus
        exps[a - 1] = power
        return cls.monomial(genus, order, exps, c)

    # inspection -------------------------------------------------------
    @property
    def order(self) -> Fraction:
        return Fraction(self._order2, 2)

    @property
    def order2(self) -> int:
        return self._order2

    @property
    def terms(self) -> dict[tuple[Fraction, ...], Any]:
        return {tuple(Fraction(e, 2) for e in k): v for k, v in self._terms.items()}

    def items2(self):
        """Items keyed by doubled exponent tuples."""
        return self._terms.items()

    def coefficient(self, exps: Iterable[Any]) -> Any:
        key = tuple(_double(e) for e in exps)
        return self._terms.get(key, Fraction(0))

    def coefficient2(self, key: Exponent2) -> Any:
        return self._terms.get(key, Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def valuation2(self) -> int | None:
        if not self._terms:
            return None
        return min(sum(k) for k in self._terms)

    @property
    def valuation(self) -> Fraction | None:
        v = self.valuation2
        return None if v is None else Fraction(v, 2)

    def is_nonnegative(self) -> bool:
        return all(e >= 0 for k in self._terms for e in k)

    def require_nonnegative(self, what: str = "series") -> "TruncatedSeries":
        if not self.is_nonnegative():
            bad = [k for k in self._terms if any(e < 0 for e in k)]
            raise ConsistencyError(f"{what} has negative rho-exponents {bad[:3]}")
        return self

    def constant_term(self) -> Any:
        return self._terms.get((0,) * self.genus, Fraction(0))

    # arithmetic -------------------------------------------------------
    def _coerce(self, other: Any) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.genus != self.genus:
                raise ConfigurationError(f"genus mismatch: {self.genus} vs {other.genus}")
            return other
        # scalars are exact to all orders; use our own order
        return TruncatedSeries._raw(
            self.genus, self._order2, {(0,) * self.genus: other} if other else {}
        )

    def __add__(self, other: Any) -> "TruncatedSeries":
        other = self._coerce(other)
        o2 = min(self._order2, other._order2)
        out = {k: v for k, v in self._terms.items() if sum(k) <= o2}
        for k, v in other._terms.items():
            if sum(k) > o2:
                continue
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return TruncatedSeries._raw(self.genus, o2, out)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw(self.genus, self._order2, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other: Any) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "TruncatedSeries":
        return self._coerce(other) + (-self)

    def scale(self, c: Any) -> "TruncatedSeries":
        if not c:
            return TruncatedSeries._raw(self.genus, self._order2, {})
        out = {}
        for k, v in self._terms.items():
            nv = v * c
            if nv:
                out[k] = nv
        return TruncatedSeries._raw(self.genus, self._order2, out)

    def __mul__(self, other: Any) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        other = self._coerce(other)
        va, vb = self.valuation2, other.valuation2
        ta, tb = self._order2, other._order2
        cands = [max(ta, tb)]
        if vb is not None:
            cands.append(ta + vb)
        if va is not None:
            cands.append(tb + va)
        o2 = min(cands)
        out: dict[Exponent2, Any] = {}
        b_items = [(k, sum(k), v) for k, v in other._terms.items()]
        for ka, ca in self._terms.items():
            sa = sum(ka)
            for kb, sb, cb in b_items:
                if sa + sb > o2:
                    continue
                key = tuple(x + y for x, y in zip(ka, kb))
                out[key] = out.get(key, 0) + ca * cb
        return TruncatedSeries._raw(self.genus, o2, {k: v for k, v in out.items() if v})

    def __rmul__(self, other: Any) -> "TruncatedSeries":
        return self.scale(other)

    def mul_monomial(self, exps: Iterable[Any], c: Any = 1) -> "TruncatedSeries":
        """Multiply by c * rho^exps exactly; the order shifts by the degree."""
        shift = tuple(_double(e) for e in exps)
        return self.mul_monomial2(shift, c)

    def mul_monomial2(self, shift: Exponent2, c: Any = 1) -> "TruncatedSeries":
        if len(shift) != self.genus:
            raise ConfigurationError("monomial has the wrong number of exponents")
        out = {}
        for k, v in self._terms.items():
            nv = v * c if c != 1 else v
            if nv:
                out[tuple(x + y for x, y in zip(k, shift))] = nv
        return TruncatedSeries._raw(self.genus, self._order2 + sum(shift), out)

    def truncate(self, order: Any) -> "TruncatedSeries":
        o2 = _double(order)
        if o2 > self._order2:
            raise ConfigurationError(
                f"cannot raise the order from {self.order} to {Fraction(o2, 2)}"
            )
        return TruncatedSeries._raw(
            self.genus, o2, {k: v for k, v in self._terms.items() if sum(k) <= o2}
        )

    def with_order(self, order: Any) -> "TruncatedSeries":
        """Re-declare the precision (used for values known exactly, e.g. polynomials)."""
        o2 = _double(order)
        return TruncatedSeries._raw(
            self.genus, o2, {k: v for k, v in self._terms.items() if sum(k) <= o2}
        )

    def inverse(self) -> "TruncatedSeries":
        """Geometric inverse; the constant term must be a unit."""
        if not self.is_nonnegative():
            raise NonInvertibleError("inverse requires nonnegative exponents")
        c0 = self.constant_term()
        if not c0:
            raise NonInvertibleError("constant term is zero")
        inv0 = 1 / c0 if isinstance(c0, FracElement) else Fraction(1) / to_fraction(c0)
        one = TruncatedSeries.one(self.genus, self.order)
        h = one - self.scale(inv0)  # positive valuation
        result = one
        power = one
        while True:
            power = power * h
            power = power.truncate(self.order) if power.order > self.order else power
            if power.is_zero():
                break
            result = result + power
        return result.scale(inv0).with_order(self.order)

    def map_coefficients(self, fn: Callable[[Any], Any]) -> "TruncatedSeries":
        out = {}
        for k, v in self._terms.items():
            nv = fn(v)
            if nv:
                out[k] = nv
        return TruncatedSeries._raw(self.genus, self._order2, out)

    # comparison -------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, TruncatedSeries):
            if other.genus != self.genus or other._order2 != self._order2:
                return False
            if self._terms.keys() != other._terms.keys():
                return False
            return all(not (v - other._terms[k]) for k, v in self._terms.items())
        if isinstance(other, (int, Fraction)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.content_hash())

    def agrees_through(self, other: "TruncatedSeries", order: Any) -> bool:
        o2 = _double(order)
        if o2 > self._order2 or o2 > other._order2:
            raise ConfigurationError("comparison order exceeds the known precision")
        return self.truncate(order) == other.truncate(order)

    def first_difference(self, other: "TruncatedSeries"):
        """Lowest-degree exponent (real) where the two series differ, or None."""
        o2 = min(self._order2, other._order2)
        keys = sorted(set(self._terms) | set(other._terms), key=lambda k: (sum(k), k))
        for k in keys:
            if sum(k) > o2:
                continue
            if self.coefficient2(k) - other.coefficient2(k):
                return tuple(Fraction(e, 2) for e in k)
        return None

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for k in sorted(self._terms, key=lambda k: (sum(k), k)):
            terms.append(
                {"rho_exp": [str(Fraction(e, 2)) for e in k], "coeff": coeff_to_json(self._terms[k])}
            )
        return {"genus": self.genus, "order": str(self.order), "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, field: RationalFunctionField | None = None) -> "TruncatedSeries":
        try:
            genus = int(data["genus"])
            order = Fraction(str(data["order"]))
            terms = {}
            for t in data["terms"]:
                exps = tuple(Fraction(str(e)) for e in t["rho_exp"])
                terms[exps] = coeff_from_json(t["coeff"], field)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed series JSON: {exc}") from exc
        return cls(genus, order, terms)

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __repr__(self) -> str:
        if not self._terms:
            return f"0 + O(rho^{self.order})"
        parts = []
        names = ["rho"] if self.genus == 1 else [f"rho{a}" for a in range(1, self.genus + 1)]
        for k in sorted(self._terms, key=lambda k: (sum(k), k)):
            mono = "*".join(
                n if e == 2 else f"{n}^{Fraction(e, 2)}" for n, e in zip(names, k) if e
            )
            c = _coeff_repr(self._terms[k])
            parts.append(c if not mono else (mono if c == "1" else f"{c}*{mono}"))
        return " + ".join(parts) + f" + O(rho^{self.order})"


def series_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    """Strict ring operation: both operands must share genus and order.

    The result is truncated back to the common order.
    """
    if not isinstance(a, TruncatedSeries) or not isinstance(b, TruncatedSeries):
        raise ConfigurationError("series_arith expects two TruncatedSeries")
    if a.genus != b.genus or a.order2 != b.order2:
        raise ConfigurationError(
            f"mismatched series: genus {a.genus}/{b.genus}, order {a.order}/{b.order}"
        )
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        r = a * b
        return r.truncate(a.order) if r.order >= a.order else r
    raise ConfigurationError(f"unknown series operation {op!r}")


def series_geometric_inverse(s: TruncatedSeries) -> TruncatedSeries:
    return s.inverse()


def coeff_to_json(c: Any) -> dict:
    if isinstance(c, FracElement):
        return {"expr": str(c.as_expr())}
    f = to_fraction(c)
    return {"num": str(f.numerator), "den": str(f.denominator)}


def coeff_from_json(data: Mapping, field: RationalFunctionField | None = None) -> Any:
    if "expr" in data:
        if field is None:
            raise ConfigurationError("symbolic coefficient needs a rational function field")
        return field.parse(data["expr"])
    return Fraction(int(data["num"]), int(data["den"]))


# ---------------------------------------------------------------------------
# differential forms


def _clean_degrees(degrees: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    items = degrees.items() if isinstance(degrees, Mapping) else degrees
    acc: dict[str, int] = {}
    for name, d in items:
        acc[name] = acc.get(name, 0) + int(d)
    return tuple(sorted((n, d) for n, d in acc.items() if d != 0))


@dataclass(frozen=True, eq=False)
class DiffForm:
    """A series body times prod_v dv^{d_v}; zero degrees are dropped."""

    body: TruncatedSeries
    degrees: tuple[tuple[str, int], ...] = dc_field(default=())

    def __post_init__(self):
        object.__setattr__(self, "degrees", _clean_degrees(self.degrees))

    @property
    def degree_map(self) -> dict[str, int]:
        return dict(self.degrees)

    def degree(self, name: str) -> int:
        return self.degree_map.get(name, 0)

    def __mul__(self, other: Any) -> "DiffForm":
        if isinstance(other, DiffForm):
            return form_mul(self, other)
        return DiffForm(self.body * other, self.degrees)

    __rmul__ = __mul__

    def __add__(self, other: "DiffForm") -> "DiffForm":
        if not isinstance(other, DiffForm):
            return NotImplemented
        if other.degrees != self.degrees:
            if self.body.is_zero():
                return DiffForm(self.body + other.body, other.degrees)
            if other.body.is_zero():
                return DiffForm(self.body + other.body, self.degrees)
            raise ConfigurationError(f"cannot add forms of degrees {self.degrees} and {other.degrees}")
        return DiffForm(self.body + other.body, self.degrees)

    def __neg__(self) -> "DiffForm":
        return DiffForm(-self.body, self.degrees)

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.degrees == other.degrees and self.body == other.body

    def __hash__(self) -> int:
        return hash((self.degrees, self.body.content_hash()))

    def truncate(self, order: Any) -> "DiffForm":
        return DiffForm(self.body.truncate(order), self.degrees)

    def to_json(self) -> dict:
        return {"degrees": {n: d for n, d in self.degrees}, "body": self.body.to_json()}

    @classmethod
    def from_json(cls, data: Mapping, field: RationalFunctionField | None = None) -> "DiffForm":
        return cls(TruncatedSeries.from_json(data["body"], field), dict(data.get("degrees", {})))

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __repr__(self) -> str:
        dx = "".join(f" d{n}^{d}" for n, d in self.degrees)
        return f"({self.body}){dx}"


def form_mul(a: DiffForm, b: DiffForm) -> DiffForm:
    """Multiply bodies and add degree maps componentwise."""
    return DiffForm(a.body * b.body, a.degrees + b.degrees)
