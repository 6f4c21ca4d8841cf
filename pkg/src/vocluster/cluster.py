"""Classical cluster algebras: seeds (x, y, B), mutation, enumeration, Laurent checks.

Indices are 1-based throughout the public interface.  Coefficients live in
a tropical semifield: y is an integer exponent vector over u_1..u_m, the
group law is addition and (y + 1) in the semifield is min(e, 0)
componentwise.  m = 0 is the trivial semifield.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Any, Iterable, Sequence

from sympy import QQ

from .exactalg import ConfigurationError, RationalFunctionField


def _pos(x: int) -> int:
    return x if x > 0 else 0


# ---------------------------------------------------------------------------
# exchange matrices


def symmetrizer(rows: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
    """Smallest positive integer diagonal D with DB skew-symmetric, or None."""
    n = len(rows)
    d: list[Fraction | None] = [None] * n
    for root in range(n):
        if d[root] is not None:
            continue
        d[root] = Fraction(1)
        stack = [root]
        while stack:
            i = stack.pop()
            for j in range(n):
                bij, bji = rows[i][j], rows[j][i]
                if i == j:
                    if bij:
                        return None
                    continue
                if (bij == 0) != (bji == 0):
                    return None
                if bij == 0:
                    continue
                if (bij > 0) == (bji > 0):
                    return None
                dj = -d[i] * bij / bji
                if d[j] is None:
                    d[j] = dj
                    stack.append(j)
                elif d[j] != dj:
                    return None
    scale = lcm(*(x.denominator for x in d)) if n else 1
    ints = [int(x * scale) for x in d]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints) if n else ()


@dataclass(frozen=True)
class ExchangeMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ConfigurationError("exchange matrix must be square")
        object.__setattr__(self, "rows", rows)
        D = symmetrizer(rows)
        if D is None:
            raise ConfigurationError(f"matrix {rows} is not skew-symmetrizable")
        object.__setattr__(self, "_D", D)

    @classmethod
    def from_json(cls, data: Any) -> "ExchangeMatrix":
        if isinstance(data, dict):
            data = data.get("B")
        if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
            raise ConfigurationError("B must be a JSON integer matrix")
        if any(not isinstance(v, int) or isinstance(v, bool) for r in data for v in r):
            raise ConfigurationError("B entries must be integers")
        return cls(tuple(tuple(r) for r in data))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def D(self) -> tuple[int, ...]:
        return self._D  # type: ignore[attr-defined]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i - 1][j - 1]

    def is_skew_symmetrized_by(self, D: Sequence[int]) -> bool:
        n = self.n
        return all(D[i] * self.rows[i][j] == -D[j] * self.rows[j][i] for i in range(n) for j in range(n))

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ConfigurationError(f"direction {k} out of range 1..{n}")


def mutate_B(B: ExchangeMatrix, k: int) -> ExchangeMatrix:
    _check_k(k, B.n)
    kk = k - 1
    b = B.rows
    n = B.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == kk or j == kk:
                row.append(-b[i][j])
            else:
                row.append(b[i][j] + _pos(-b[i][kk]) * b[kk][j] + b[i][kk] * _pos(b[kk][j]))
        out.append(tuple(row))
    return ExchangeMatrix(tuple(out))


# ---------------------------------------------------------------------------
# tropical coefficients

Tropical = tuple[int, ...]


def trop_mul(a: Tropical, b: Tropical) -> Tropical:
    return tuple(x + y for x, y in zip(a, b))


def trop_pow(a: Tropical, e: int) -> Tropical:
    return tuple(x * e for x in a)


def trop_oplus(a: Tropical, b: Tropical) -> Tropical:
    return tuple(min(x, y) for x, y in zip(a, b))


def trop_one(m: int) -> Tropical:
    return (0,) * m


def mutate_y(y: Sequence[Tropical], B: ExchangeMatrix, k: int) -> tuple[Tropical, ...]:
    _check_k(k, B.n)
    yk = tuple(y[k - 1])
    yk_plus = trop_oplus(yk, trop_one(len(yk)))
    out = []
    for j in range(1, B.n + 1):
        if j == k:
            out.append(trop_pow(yk, -1))
            continue
        bkj = B[k, j]
        out.append(trop_mul(trop_mul(tuple(y[j - 1]), trop_pow(yk, _pos(bkj))), trop_pow(yk_plus, -bkj)))
    return tuple(out)


# ---------------------------------------------------------------------------
# seeds


@dataclass(frozen=True)
class ClassicalSeed:
    """A seed (x, y, B); x lives in the field of the initial x_i and u_j."""

    x: tuple
    y: tuple[Tropical, ...]
    B: ExchangeMatrix
    field: RationalFunctionField

    @property
    def n(self) -> int:
        return self.B.n

    @property
    def m(self) -> int:
        return len(self.y[0]) if self.y else 0

    def tropical_monomial(self, e: Tropical):
        out = self.field(1)
        for j, ej in enumerate(e, 1):
            if ej:
                out *= self.field[f"u{j}"] ** ej
        return out

    def cluster_key(self) -> frozenset:
        return frozenset(self.x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClassicalSeed):
            return NotImplemented
        return (self.B == other.B and self.y == other.y
                and all(not (a - b) for a, b in zip(self.x, other.x)) and len(self.x) == len(other.x))

    def __hash__(self) -> int:
        return hash((self.B, self.y, tuple(self.x)))

    def to_json(self) -> dict:
        return {"B": self.B.to_json(), "y": [list(e) for e in self.y], "x": [str(v.as_expr()) for v in self.x]}


def initial_seed(B: ExchangeMatrix | Sequence[Sequence[int]], coefficients: str | Sequence[Sequence[int]] = "trivial") -> ClassicalSeed:
    """Seed at the initial cluster x_1..x_n.

    ``coefficients`` is "trivial" (m = 0), "principal" (y_i = u_i) or an
    explicit list of exponent vectors.
    """
    if not isinstance(B, ExchangeMatrix):
        B = ExchangeMatrix(tuple(tuple(r) for r in B))
    n = B.n
    if coefficients == "trivial":
        y: tuple[Tropical, ...] = tuple(() for _ in range(n))
    elif coefficients == "principal":
        y = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    else:
        y = tuple(tuple(int(v) for v in e) for e in coefficients)
        if len(y) != n or len({len(e) for e in y}) > 1:
            raise ConfigurationError("need n coefficient vectors of one common length")
    m = len(y[0]) if y else 0
    names = [f"x{i}" for i in range(1, n + 1)] + [f"u{j}" for j in range(1, m + 1)]
    field = RationalFunctionField(names)
    x = tuple(field[f"x{i}"] for i in range(1, n + 1))
    return ClassicalSeed(x, y, B, field)


def _laurent(v) -> tuple[Any, tuple[int, ...]] | None:
    """(numerator over QQ, denominator exponents) if v has a monomial denominator."""
    terms = v.denom.terms()
    if len(terms) != 1:
        return None
    monom, c = terms[0]
    return v.numer.quo_ground(c), tuple(monom)


def _laurent_product(parts, exps) -> tuple[Any, list[int]]:
    ring = parts[0][0].ring
    num = ring.one
    den = [0] * ring.ngens
    for (p, m), e in zip(parts, exps):
        if e:
            num *= p**e
            den = [a + e * b for a, b in zip(den, m)]
    return num, den


def _monomial(ring, exps: Sequence[int]):
    return ring({tuple(exps): 1})


def _canonical(field, num, den: list[int]):
    """Build the reduced fraction num / x^den exactly as the field normalizes it."""
    ring = num.ring
    # negative denominator exponents belong to the numerator
    lift = [max(-d, 0) for d in den]
    if any(lift):
        num = num * _monomial(ring, lift)
        den = [max(d, 0) for d in den]
    # cancel monomial factors shared by every term
    inner = [min(m[i] for m in num.monoms()) for i in range(ring.ngens)]
    shift = [min(a, b) for a, b in zip(inner, den)]
    if any(shift):
        num = num.exquo(_monomial(ring, shift))
        den = [a - b for a, b in zip(den, shift)]
    # integer normalization: primitive integer numerator against an integer denominator
    dens = [c.denominator for c in num.coeffs()]
    scale = lcm(*dens)
    nums = [int(c.numerator) * (scale // int(c.denominator)) for c in num.coeffs()]
    g = 0
    for c in nums:
        g = gcd(g, c)
    g = gcd(g, scale) or 1
    num = num.mul_ground(QQ(scale, g))
    dc = scale // g
    return field.field.raw_new(num, field.field.ring({tuple(den): dc}))


def mutate_x(seed: ClassicalSeed, k: int) -> tuple:
    """Exchange relation in direction k.

    Variables with monomial denominators are combined by exact polynomial
    division; anything else falls back to rational-function arithmetic.
    """
    _check_k(k, seed.n)
    new = list(seed.x)
    parts = [_laurent(v) for v in seed.x]
    if all(p is not None for p in parts):
        fast = _mutate_x_laurent(seed, k, parts)
        if fast is not None:
            new[k - 1] = fast
            return tuple(new)
    new[k - 1] = _mutate_x_field(seed, k)
    return tuple(new)


def _coefficient_exps(seed: ClassicalSeed, e: Tropical) -> list[int]:
    return [0] * seed.n + list(e)


def _mutate_x_laurent(seed: ClassicalSeed, k: int, parts):
    B = seed.B
    yk = seed.y[k - 1]
    ring = parts[0][0].ring
    pos = [max(B[i, k], 0) for i in range(1, seed.n + 1)]
    neg = [max(-B[i, k], 0) for i in range(1, seed.n + 1)]
    p_num, p_den = _laurent_product(parts, pos)
    m_num, m_den = _laurent_product(parts, neg)
    # y_k as a Laurent monomial in the u_j
    ye = _coefficient_exps(seed, yk)
    p_den = [d - e for d, e in zip(p_den, ye)]
    common = [max(a, b, 0) for a, b in zip(p_den, m_den)]
    lift_p = [c - d for c, d in zip(common, p_den)]
    lift_m = [c - d for c, d in zip(common, m_den)]
    total = p_num * _monomial(ring, lift_p) + m_num * _monomial(ring, lift_m)
    # divide by (y_k + 1) x_k = (y_k + 1) N_k / x^{d_k}
    nk, dk = parts[k - 1]
    q, r = (total * _monomial(ring, dk)).div(nk)
    if r:
        return None
    oplus = _coefficient_exps(seed, trop_oplus(yk, trop_one(len(yk))))
    den = [c + o for c, o in zip(common, oplus)]
    return _canonical(seed.field, q, den)


def _mutate_x_field(seed: ClassicalSeed, k: int):
    F = seed.field
    B = seed.B
    yk = seed.y[k - 1]
    plus = F(1)
    minus = F(1)
    for i in range(1, seed.n + 1):
        b = B[i, k]
        if b > 0:
            plus *= seed.x[i - 1] ** b
        elif b < 0:
            minus *= seed.x[i - 1] ** (-b)
    num = seed.tropical_monomial(yk) * plus + minus
    den = seed.tropical_monomial(trop_oplus(yk, trop_one(len(yk)))) * seed.x[k - 1]
    return num / den


def mutate(seed: ClassicalSeed, k: int) -> ClassicalSeed:
    return ClassicalSeed(mutate_x(seed, k), mutate_y(seed.y, seed.B, k), mutate_B(seed.B, k), seed.field)


def mutate_word(seed: ClassicalSeed, word: Iterable[int]) -> ClassicalSeed:
    for k in word:
        seed = mutate(seed, k)
    return seed


def parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad mutation word {text!r}") from exc


# ---------------------------------------------------------------------------
# exchange graph


@dataclass
class ExchangeGraphSummary:
    clusters: int
    variables: int
    closed: bool
    depth: int
    cap: int

    def to_json(self) -> dict:
        return {"clusters": self.clusters, "variables": self.variables, "closed": self.closed,
                "depth": self.depth, "cap": self.cap}


def enumerate_clusters(seed: ClassicalSeed, max_depth: int | None = None, cap: int = 500,
                       order: str = "bfs") -> ExchangeGraphSummary:
    """Closure of the seed under all mutations, deduplicated by unordered cluster.

    ``closed`` is true when no unseen cluster is reachable; hitting ``cap``
    or ``max_depth`` first leaves it false.  ``depth`` is the largest
    mutation distance at which a new cluster appeared.
    """
    if order not in ("bfs", "dfs"):
        raise ConfigurationError(f"unknown order {order!r}")
    best: dict[frozenset, int] = {seed.cluster_key(): 0}
    todo: deque[tuple[ClassicalSeed, int]] = deque([(seed, 0)])
    truncated = False
    while todo:
        cur, d = todo.popleft() if order == "bfs" else todo.pop()
        if best.get(cur.cluster_key(), d) < d:
            continue
        if max_depth is not None and d >= max_depth:
            if any(mutate(cur, k).cluster_key() not in best for k in range(1, cur.n + 1)):
                truncated = True
            continue
        for k in range(1, cur.n + 1):
            nxt = mutate(cur, k)
            key = nxt.cluster_key()
            if key in best and best[key] <= d + 1:
                continue
            if key not in best and len(best) >= cap:
                truncated = True
                todo.clear()
                break
            best[key] = d + 1
            todo.append((nxt, d + 1))
    variables = set()
    for key in best:
        variables |= key
    closed = not truncated
    return ExchangeGraphSummary(len(best), len(variables), closed, max(best.values()), cap)


def alternating_period(seed: ClassicalSeed, i: int, j: int, limit: int = 20) -> int | None:
    """Length of the shortest word i, j, i, ... returning to the initial cluster."""
    start = seed.cluster_key()
    cur = seed
    for step in range(1, limit + 1):
        cur = mutate(cur, i if step % 2 else j)
        if cur.cluster_key() == start and step > 1:
            return step
    return None


# ---------------------------------------------------------------------------
# Laurent phenomenon


@dataclass
class LaurentCertificate:
    word: tuple[int, ...]
    laurent: bool
    denominators: tuple[tuple[int, ...], ...]   # x-exponents d_i of each denominator
    failures: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"word": list(self.word), "laurent": self.laurent,
                "denominators": [list(d) for d in self.denominators], "failures": list(self.failures)}


def laurent_check(seed: ClassicalSeed, word: Iterable[int]) -> LaurentCertificate:
    """Mutate along ``word`` and test that every variable has a monomial denominator."""
    word = tuple(word)
    final = mutate_word(seed, word)
    dens = []
    bad = []
    for idx, v in enumerate(final.x, 1):
        terms = v.denom.terms()
        if len(terms) != 1:
            bad.append(idx)
            dens.append(())
            continue
        monom, _ = terms[0]
        dens.append(tuple(monom[: seed.n]))
    return LaurentCertificate(word, not bad, tuple(dens), tuple(bad))


def all_words(n: int, max_len: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        frontier = [w + (k,) for w in frontier for k in range(1, n + 1)]
        out += frontier
    return out


def seed_summary(seed: ClassicalSeed) -> str:
    return json.dumps(seed.to_json(), sort_keys=True)
