"""Schottky uniformization data in exact rational arithmetic.

Handle a is described either by its fixed points W_{+-a} and multiplier q_a,
or by the sewing data (w_a, w_{-a}, rho_a).  The generator

    gamma_a(z) = w_{-a} + rho_a / (z - w_a)

has matrix [[w_{-a}, rho_a - w_{-a} w_a], [1, -w_a]] of determinant
-rho_a, so generators are handled as projective (GL2) maps; only the
action on parameter space requires determinant one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .exactalg import ConfigurationError, ExactAlgebraError, PoleError, to_fraction


class DegenerateHandleError(ExactAlgebraError, ValueError):
    pass


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "oo"


INFINITY = _Infinity()


@dataclass(frozen=True)
class MobiusMap:
    """z -> (A z + B) / (C z + D) with nonzero determinant."""

    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.det == 0:
            raise ConfigurationError("Mobius matrix is singular")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def parse(cls, text: str) -> "MobiusMap":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ConfigurationError(f"expected 'a,b,c,d', got {text!r}")
        try:
            return cls(*(Fraction(p) for p in parts))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"bad Mobius entries {text!r}: {exc}") from exc

    @property
    def det(self) -> Fraction:
        return self.A * self.D - self.B * self.C

    @property
    def trace(self) -> Fraction:
        return self.A + self.D

    def is_sl2(self) -> bool:
        return self.det == 1

    def __call__(self, z: Any) -> Any:
        if z is INFINITY:
            return INFINITY if self.C == 0 else self.A / self.C
        z = to_fraction(z)
        den = self.C * z + self.D
        num = self.A * z + self.B
        if den == 0:
            return INFINITY
        return num / den

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap(
            self.A * other.A + self.B * other.C,
            self.A * other.B + self.B * other.D,
            self.C * other.A + self.D * other.C,
            self.C * other.B + self.D * other.D,
        )

    def inverse(self) -> "MobiusMap":
        d = self.det
        return MobiusMap(self.D / d, -self.B / d, -self.C / d, self.A / d)

    def same_transformation(self, other: "MobiusMap") -> bool:
        """Projective equality: the two matrices are proportional."""
        u = (self.A, self.B, self.C, self.D)
        v = (other.A, other.B, other.C, other.D)
        return all(u[i] * v[j] == u[j] * v[i] for i in range(4) for j in range(i + 1, 4))

    def is_identity(self) -> bool:
        return self.same_transformation(MobiusMap.identity())

    def to_list(self) -> list[str]:
        return [str(x) for x in (self.A, self.B, self.C, self.D)]


@dataclass(frozen=True)
class SchottkyParams:
    """Sewing data per handle; fixed-point data is kept when known."""

    genus: int
    w: Mapping[int, Fraction]
    rho: Mapping[int, Fraction]
    W: Mapping[int, Any] | None = None
    q: Mapping[int, Fraction] | None = None

    def __post_init__(self):
        if self.genus < 1:
            raise ConfigurationError("genus must be positive")
        w = {int(a): to_fraction(v) for a, v in self.w.items()}
        rho = {int(a): to_fraction(v) for a, v in self.rho.items()}
        for a in range(1, self.genus + 1):
            if a not in w or -a not in w:
                raise ConfigurationError(f"missing centre for handle {a}")
            if w[a] == w[-a]:
                raise DegenerateHandleError(f"w_{a} = w_{-a}")
            if a not in rho and -a in rho:
                rho[a] = rho[-a]
            if a not in rho:
                raise ConfigurationError(f"missing rho_{a}")
            if rho[a] == 0:
                raise DegenerateHandleError(f"rho_{a} = 0")
            rho[-a] = rho[a]
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "rho", rho)
        if self.q is not None:
            q = {int(a): to_fraction(v) for a, v in self.q.items()}
            for a in list(q):
                q[-a] = q[a]
            object.__setattr__(self, "q", q)

    @property
    def indices(self) -> tuple[int, ...]:
        out: list[int] = []
        for a in range(1, self.genus + 1):
            out += [a, -a]
        return tuple(out)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "genus": self.genus,
            "w": {str(a): str(self.w[a]) for a in self.indices},
            "rho": {str(a): str(self.rho[a]) for a in range(1, self.genus + 1)},
        }
        if self.W is not None:
            out["W"] = {str(a): str(v) for a, v in self.W.items()}
        if self.q is not None:
            out["q"] = {str(a): str(self.q[a]) for a in range(1, self.genus + 1)}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SchottkyParams":
        try:
            genus = int(data["genus"])
            if "W" in data and "q" in data and "w" not in data:
                Wp = [Fraction(str(data["W"][str(a)])) for a in range(1, genus + 1)]
                Wm = [Fraction(str(data["W"][str(-a)])) for a in range(1, genus + 1)]
                qs = [Fraction(str(data["q"][str(a)])) for a in range(1, genus + 1)]
                return params_from_fixed_points(Wp, Wm, qs)
            w = {int(a): Fraction(str(v)) for a, v in data["w"].items()}
            rho = {int(a): Fraction(str(v)) for a, v in data["rho"].items()}
            W = {int(a): Fraction(str(v)) for a, v in data["W"].items()} if "W" in data else None
            q = {int(a): Fraction(str(v)) for a, v in data["q"].items()} if "q" in data else None
        except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
            raise ConfigurationError(f"malformed Schottky parameters: {exc}") from exc
        return cls(genus, w, rho, W, q)


def params_from_fixed_points(W_plus: Sequence[Any], W_minus: Sequence[Any], q: Sequence[Any]) -> SchottkyParams:
    """w_a = (W_a - q W_{-a})/(1-q), w_{-a} = (W_{-a} - q W_a)/(1-q), rho = -q(W_a-W_{-a})^2/(1-q)^2."""
    if not (len(W_plus) == len(W_minus) == len(q)) or not W_plus:
        raise ConfigurationError("need matching nonempty lists W_+, W_-, q")
    w: dict[int, Fraction] = {}
    rho: dict[int, Fraction] = {}
    W: dict[int, Fraction] = {}
    qs: dict[int, Fraction] = {}
    for a, (Wp, Wm, qa) in enumerate(zip(W_plus, W_minus, q), 1):
        Wp, Wm, qa = to_fraction(Wp), to_fraction(Wm), to_fraction(qa)
        if Wp == Wm:
            raise DegenerateHandleError(f"W_{a} = W_{-a}")
        if qa == 0:
            raise DegenerateHandleError(f"q_{a} = 0")
        if qa == 1:
            raise PoleError(f"q_{a} = 1")
        w[a] = (Wp - qa * Wm) / (1 - qa)
        w[-a] = (Wm - qa * Wp) / (1 - qa)
        rho[a] = -qa * (Wp - Wm) ** 2 / (1 - qa) ** 2
        W[a], W[-a] = Wp, Wm
        qs[a] = qa
    return SchottkyParams(len(q), w, rho, W, qs)


def generator_map(params: SchottkyParams, a: int) -> MobiusMap:
    """gamma_a; gamma_{-a} is its inverse."""
    if a == 0 or abs(a) > params.genus:
        raise ConfigurationError(f"handle index {a} out of range")
    b = abs(a)
    wp, wm, r = params.w[b], params.w[-b], params.rho[b]
    if wp == wm:
        raise DegenerateHandleError(f"w_{b} = w_{-b}")
    g = MobiusMap(wm, r - wm * wp, 1, -wp)
    return g if a > 0 else g.inverse()


def generator_from_fixed_points(W_plus: Any, W_minus: Any, q: Any) -> MobiusMap:
    """sigma^{-1} diag(q, 1) sigma with sigma(z) = (z - W_{-a})/(z - W_a), up to scale.

    The square-root normalization of sigma cancels projectively.
    """
    Wp, Wm, qa = to_fraction(W_plus), to_fraction(W_minus), to_fraction(q)
    sigma = MobiusMap(1, -Wm, 1, -Wp)
    return sigma.inverse() @ MobiusMap(qa, 0, 0, 1) @ sigma


def _fixed_data(params: SchottkyParams, a: int) -> tuple[Fraction, Fraction, Fraction]:
    if params.W is None or params.q is None:
        raise ConfigurationError("sewing check needs fixed points W and multipliers q")
    b = abs(a)
    return params.W[b], params.W[-b], params.q[b]


def sewing_ratio(params: SchottkyParams, a: int, z: Any, zp: Any) -> Fraction:
    Wp, Wm, _ = _fixed_data(params, a)
    z, zp = to_fraction(z), to_fraction(zp)
    if z in (Wp, Wm) or zp in (Wp, Wm):
        raise PoleError("sewing relation evaluated at a fixed point")
    return ((zp - Wm) / (zp - Wp)) * ((z - Wp) / (z - Wm))


def sewing_check(params: SchottkyParams, a: int, z: Any, zp: Any) -> bool:
    """((z'-W_{-a})/(z'-W_a)) ((z-W_a)/(z-W_{-a})) == q_a."""
    return sewing_ratio(params, a, z, zp) == params.q[abs(a)]


def sewing_check_rho(params: SchottkyParams, a: int, z: Any, zp: Any) -> bool:
    """(z' - w_{-a})(z - w_a) == rho_a."""
    b = abs(a)
    return (to_fraction(zp) - params.w[-b]) * (to_fraction(z) - params.w[b]) == params.rho[b]


def sewing_forms_agree(params: SchottkyParams, a: int, z: Any, zp: Any) -> bool:
    return sewing_check(params, a, z, zp) == sewing_check_rho(params, a, z, zp)


def jordan_condition(params: SchottkyParams) -> tuple[bool, tuple[int, int] | None]:
    """|w_a - w_b| > |rho_a|^{1/2} + |rho_b|^{1/2} for all a != b in I.

    Decided exactly: with s = d^2 - |rho_a| - |rho_b| the inequality
    d > sqrt|rho_a| + sqrt|rho_b| is equivalent to s > 0 and s^2 > 4|rho_a rho_b|.
    """
    idx = params.indices
    for i, a in enumerate(idx):
        for b in idx[i + 1 :]:
            d2 = (params.w[a] - params.w[b]) ** 2
            ra, rb = abs(params.rho[a]), abs(params.rho[b])
            s = d2 - ra - rb
            if not (s > 0 and s * s > 4 * ra * rb):
                return False, (a, b)
    return True, None


def sl2_action(gamma: MobiusMap, params: SchottkyParams) -> SchottkyParams:
    """Transform the sewing data under z -> gamma z with det gamma = 1.

    w_a -> ((A w_a + B)(C w_{-a} + D) - rho_a A C) / den,
    rho_a -> rho_a / den^2, den = (C w_a + D)(C w_{-a} + D) - rho_a C^2.
    """
    if not gamma.is_sl2():
        raise ConfigurationError("the parameter-space action needs determinant one")
    A, B, C, D = gamma.A, gamma.B, gamma.C, gamma.D
    w: dict[int, Fraction] = {}
    rho: dict[int, Fraction] = {}
    for a in range(1, params.genus + 1):
        r = params.rho[a]
        for s in (a, -a):
            wa, wb = params.w[s], params.w[-s]
            den = (C * wa + D) * (C * wb + D) - r * C * C
            if den == 0:
                raise PoleError(f"sl2 action denominator vanishes for handle {a}")
            w[s] = ((A * wa + B) * (C * wb + D) - r * A * C) / den
            if s == a:
                rho[a] = r / den**2
    W = None
    if params.W is not None:
        W = {k: gamma(v) for k, v in params.W.items()}
        if any(v is INFINITY for v in W.values()):
            W = None
    return SchottkyParams(params.genus, w, rho, W, params.q if W is not None else None)


# ---------------------------------------------------------------------------
# words and limit points


@dataclass(frozen=True)
class GroupWord:
    letters: tuple[int, ...]

    def __post_init__(self):
        for x, y in zip(self.letters, self.letters[1:]):
            if x == -y:
                raise ConfigurationError(f"word {self.letters} is not reduced")
        if any(x == 0 for x in self.letters):
            raise ConfigurationError("letters must be nonzero")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return ".".join(f"g{x}" for x in self.letters)


def enumerate_words(genus: int, max_len: int) -> list[GroupWord]:
    """All reduced words of length <= max_len (length-lexicographic)."""
    if max_len < 0:
        raise ConfigurationError("max_len must be nonnegative")
    letters = []
    for a in range(1, genus + 1):
        letters += [a, -a]
    out = [GroupWord(())]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        out.extend(GroupWord(w) for w in nxt)
        frontier = nxt
    return out


def word_count(genus: int, k: int) -> int:
    return 1 if k == 0 else 2 * genus * (2 * genus - 1) ** (k - 1)


def word_map(params: SchottkyParams, word: GroupWord | Iterable[int]) -> MobiusMap:
    letters = word.letters if isinstance(word, GroupWord) else tuple(word)
    m = MobiusMap.identity()
    for x in letters:
        m = m @ generator_map(params, x)
    return m


@dataclass(frozen=True)
class QuadraticPoint:
    """The number (base + sign * sqrt(radicand)) / den, exact.

    ``trace`` and ``discriminant`` describe the word's matrix.
    """

    base: Fraction
    sign: int
    radicand: Fraction
    den: Fraction
    trace: Fraction
    discriminant: Fraction

    def is_rational(self) -> bool:
        r = self.radicand
        return r.numerator >= 0 and isqrt(r.numerator) ** 2 == r.numerator and isqrt(r.denominator) ** 2 == r.denominator

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("point is irrational")
        r = self.radicand
        root = Fraction(isqrt(r.numerator), isqrt(r.denominator))
        return (self.base + self.sign * root) / self.den

    def __float__(self) -> float:
        return float((float(self.base) + self.sign * float(self.radicand) ** 0.5) / float(self.den))

    def to_json(self) -> dict:
        return {"base": str(self.base), "sign": self.sign, "radicand": str(self.radicand), "den": str(self.den),
                "trace": str(self.trace), "discriminant": str(self.discriminant)}


@dataclass(frozen=True)
class LimitPoint:
    word: GroupWord
    point: QuadraticPoint | Fraction | None
    flag: str = "loxodromic"


def attracting_fixed_point(m: MobiusMap) -> tuple[QuadraticPoint | Fraction | None, str]:
    """Attracting fixed point of a real Mobius map, or a flag explaining why none."""
    A, B, C, D = m.A, m.B, m.C, m.D
    tr, det = m.trace, m.det
    disc = tr * tr - 4 * det
    if m.is_identity():
        return None, "identity"
    if C == 0:
        if A == D:
            return INFINITY, "parabolic"
        if A == -D:
            return None, "neutral"
        z0 = B / (D - A)
        # derivative at z0 is A/D
        if abs(A) < abs(D):
            return z0, "loxodromic"
        return INFINITY, "loxodromic"
    if disc == 0:
        return None, "parabolic"
    if disc < 0:
        return None, "elliptic"
    if tr == 0:
        return None, "neutral"
    # |m'(z)| = |det| / |Cz + D|^2 with Cz + D = (tr +- sqrt(disc))/2: the sign of tr wins
    sign = 1 if tr > 0 else -1
    return QuadraticPoint(A - D, sign, disc, 2 * C, tr, disc), "loxodromic"


def limit_point_cloud(params: SchottkyParams, max_len: int) -> list[LimitPoint]:
    ok, pair = jordan_condition(params)
    if not ok:
        raise ConfigurationError(f"Jordan condition fails for handles {pair}")
    out = []
    for word in enumerate_words(params.genus, max_len):
        if not word.letters:
            continue
        pt, flag = attracting_fixed_point(word_map(params, word))
        out.append(LimitPoint(word, pt, flag))
    return out
