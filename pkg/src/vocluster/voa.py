"""The Heisenberg (free boson) vertex operator algebra of rank r.

A Fock basis vector a_{c_1}(-n_1)...a_{c_k}(-n_k)1 is stored as a tuple of
``(n, c)`` pairs sorted in decreasing order.  For rank one the colour is
always 0 and states print as ``a(-2)a(-1)|0>``.

Vertex operators of basis vectors are normal-ordered products of the
divided derivatives of a_c(z), so every mode action reduces to finitely
many Heisenberg monomials.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Any, Iterable, Iterator, Mapping

from .exactalg import ConfigurationError, DomainError, ExactAlgebraError, binomial, to_fraction

Mode = tuple[int, int]
Monomial = tuple[Mode, ...]


class CutoffError(ExactAlgebraError, ValueError):
    """A result would leave the weight range the VOA was built for."""


class NonDegeneracyError(ExactAlgebraError, ArithmeticError):
    """The invariant form is singular on a graded piece."""


def _normalize_key(key: Iterable) -> Monomial:
    parts = []
    for item in key:
        if isinstance(item, int):
            parts.append((item, 0))
        else:
            n, c = item
            parts.append((int(n), int(c)))
    for n, c in parts:
        if n < 1 or c < 0:
            raise ConfigurationError(f"invalid creation mode a{c}(-{n})")
    return tuple(sorted(parts, reverse=True))


def monomial_weight(key: Monomial) -> int:
    return sum(n for n, _ in key)


class FockState:
    """Finite linear combination of Fock basis vectors with exact coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Any] = {}
        for key, c in items:
            k = _normalize_key(key)
            acc[k] = acc.get(k, 0) + c
        self._terms = {k: v for k, v in acc.items() if v}

    @classmethod
    def _raw(cls, terms: dict) -> "FockState":
        s = cls.__new__(cls)
        s._terms = terms
        return s

    @classmethod
    def vacuum(cls) -> "FockState":
        return cls._raw({(): Fraction(1)})

    @classmethod
    def zero(cls) -> "FockState":
        return cls._raw({})

    @classmethod
    def monomial(cls, partition: Iterable, coeff: Any = 1) -> "FockState":
        return cls({tuple(partition): coeff})

    @property
    def terms(self) -> dict[Monomial, Any]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, key: Iterable) -> Any:
        return self._terms.get(_normalize_key(key), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def weights(self) -> set[int]:
        return {monomial_weight(k) for k in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.weights()) == 1

    @property
    def weight(self) -> int:
        ws = self.weights()
        if len(ws) != 1:
            raise DomainError(f"state {self} is not homogeneous")
        return ws.pop()

    def component(self, k: int) -> "FockState":
        return FockState._raw({m: c for m, c in self._terms.items() if monomial_weight(m) == k})

    def components(self) -> dict[int, "FockState"]:
        return {k: self.component(k) for k in sorted(self.weights())}

    def max_colour(self) -> int:
        return max((c for m in self._terms for _, c in m), default=-1)

    def __add__(self, other: "FockState") -> "FockState":
        if not isinstance(other, FockState):
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return FockState._raw(out)

    def __neg__(self) -> "FockState":
        return FockState._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "FockState") -> "FockState":
        return self + (-other)

    def __mul__(self, c: Any) -> "FockState":
        if isinstance(c, FockState):
            return NotImplemented
        if not c:
            return FockState.zero()
        return FockState._raw({k: v * c for k, v in self._terms.items() if v * c})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FockState):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self) -> int:
        return hash(frozenset((k, to_fraction(v)) for k, v in self._terms.items()))

    def sort_key(self):
        return tuple(sorted((k, str(v)) for k, v in self._terms.items()))

    def __repr__(self) -> str:
        return format_state(self)

    def to_json(self) -> dict:
        out = []
        for k in sorted(self._terms, reverse=True):
            c = to_fraction(self._terms[k])
            entry = {"partition": [n for n, _ in k], "coeff": {"num": str(c.numerator), "den": str(c.denominator)}}
            if any(col for _, col in k):
                entry["colours"] = [col for _, col in k]
            out.append(entry)
        return {"terms": out}

    @classmethod
    def from_json(cls, data: Mapping) -> "FockState":
        try:
            terms = {}
            for t in data["terms"]:
                parts = [int(n) for n in t["partition"]]
                cols = [int(c) for c in t.get("colours", [0] * len(parts))]
                c = t["coeff"]
                key = _normalize_key(zip(parts, cols))
                terms[key] = terms.get(key, 0) + Fraction(int(c["num"]), int(c["den"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed state JSON: {exc}") from exc
        return cls(terms)


def _mode_name(n: int, c: int) -> str:
    return f"a{c + 1}(-{n})" if c else f"a(-{n})"


def format_state(state: FockState) -> str:
    if state.is_zero():
        return "0"
    parts = []
    for k in sorted(state._terms, key=lambda m: (monomial_weight(m), m)):
        c = to_fraction(state._terms[k])
        body = "".join(_mode_name(n, col) for n, col in k) + "|0>"
        if c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append(f"{c}*{body}")
    return " + ".join(parts).replace("+ -", "- ")


_TERM_RE = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?((?:a\d*\(-\d+\)\s*)*)\s*(\|0>|1)?\s*")
_MODE_RE = re.compile(r"a(\d*)\(-(\d+)\)")


def parse_state(text: str) -> FockState:
    """Parse expressions such as ``"a(-2)a(-1)|0> - 1/2*a(-1)a(-1)|0>"``.

    ``a2(-1)`` names the second colour; ``omega`` is the rank-one conformal
    vector and ``|0>`` (or ``1``) the vacuum.
    """
    src = text.strip().replace("omega", "1/2*a(-1)a(-1)|0>")
    if not src:
        raise ConfigurationError("empty state expression")
    pos = 0
    terms: dict[Monomial, Fraction] = {}
    first = True
    while pos < len(src):
        m = _TERM_RE.match(src, pos)
        if not m or m.end() == pos:
            raise ConfigurationError(f"cannot parse state {text!r} at {src[pos:]!r}")
        sign, coeff, modes, vac = m.groups()
        if sign is None and not first:
            raise ConfigurationError(f"missing operator in {text!r}")
        if not modes and not vac and not coeff:
            raise ConfigurationError(f"cannot parse state {text!r}")
        if modes and not vac:
            raise ConfigurationError(f"state term {m.group(0).strip()!r} must end in |0>")
        c = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            c = -c
        key = _normalize_key(
            (int(n), int(col) - 1 if col else 0) for col, n in _MODE_RE.findall(modes or "")
        )
        terms[key] = terms.get(key, 0) + c
        pos = m.end()
        first = False
    return FockState(terms)


def partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of n in reverse-lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def _coloured_monomials(level: int, rank: int) -> list[Monomial]:
    out = set()
    for part in partitions(level):
        for cols in product(range(rank), repeat=len(part)):
            out.add(_normalize_key(zip(part, cols)))
    return sorted(out, reverse=True)


def z_lambda(key: Monomial) -> int:
    """prod_i n_i * prod_{(n,c)} mult!, the norm of a Fock basis vector."""
    out = 1
    counts: dict[Mode, int] = {}
    for n, c in key:
        out *= n
        counts[(n, c)] = counts.get((n, c), 0) + 1
    for m in counts.values():
        out *= factorial(m)
    return out


# ---------------------------------------------------------------------------
# single Heisenberg modes on dictionaries of monomials


def _apply_mode(terms: dict[Monomial, Any], m: int, colour: int) -> dict[Monomial, Any]:
    out: dict[Monomial, Any] = {}
    if m == 0:
        return out  # charge zero Fock module
    if m < 0:
        ins = (-m, colour)
        for k, c in terms.items():
            nk = tuple(sorted(k + (ins,), reverse=True))
            out[nk] = out.get(nk, 0) + c
        return out
    target = (m, colour)
    for k, c in terms.items():
        cnt = k.count(target)
        if not cnt:
            continue
        idx = k.index(target)
        nk = k[:idx] + k[idx + 1 :]
        out[nk] = out.get(nk, 0) + c * m * cnt
    return out


@dataclass(frozen=True)
class BilinearFormSpec:
    """The Mobius parameter alpha of the invariant form (rational or symbolic)."""

    alpha: Any = Fraction(1)

    def __post_init__(self):
        if not self.alpha:
            raise ConfigurationError("alpha must be nonzero")

    def power(self, e: int) -> Any:
        if e >= 0:
            return self.alpha**e
        return 1 / (self.alpha ** (-e)) if not isinstance(self.alpha, int) else Fraction(1, self.alpha ** (-e))


@dataclass(frozen=True)
class ModeOperator:
    """sum_i scale_i * state_i(mode_i) acting on Fock states."""

    voa: "HeisenbergVOA"
    parts: tuple[tuple[FockState, int, Any], ...]

    def __call__(self, v: FockState) -> FockState:
        out = FockState.zero()
        for state, mode, scale in self.parts:
            out = out + self.voa.mode_action(state, mode, v) * scale
        return out

    def describe(self) -> str:
        return " + ".join(f"{scale}*[{s}]({m})" for s, m, scale in self.parts)


@dataclass(frozen=True)
class VertexBlock:
    """Matrix of the y^{power} coefficient of Y(v,y) from V_in to V_out."""

    y_power: int
    mode: int
    rows: tuple[Monomial, ...]
    cols: tuple[Monomial, ...]
    matrix: tuple[tuple[Fraction, ...], ...]


class HeisenbergVOA:
    """Rank-``rank`` Heisenberg VOA restricted to weights <= ``cutoff``.

    Central charge equals the rank and omega = 1/2 sum_c a_c(-1)^2 1.
    """

    def __init__(self, rank: int = 1, cutoff: int = 12):
        if rank < 1:
            raise ConfigurationError("rank must be positive")
        if cutoff < 1:
            raise ConfigurationError("weight cutoff must be positive")
        self.rank = rank
        self.cutoff = cutoff
        self.central_charge = Fraction(rank)
        self.vacuum = FockState.vacuum()
        self.omega = FockState({((1, c), (1, c)): Fraction(1, 2) for c in range(rank)})
        self._basis_cache: dict[int, list[Monomial]] = {}
        self._monomial_cache: dict[tuple, dict[Monomial, Any]] = {}
        self._dual_cache: dict[int, list[tuple[FockState, FockState]]] = {}

    def __repr__(self) -> str:
        return f"HeisenbergVOA(rank={self.rank}, cutoff={self.cutoff})"

    # states -------------------------------------------------------------
    def a(self, n: int = 1, colour: int = 0) -> FockState:
        """The state a_colour(-n)1."""
        self._check_colour(colour)
        return FockState._raw({((n, colour),): Fraction(1)})

    def state(self, text: str) -> FockState:
        s = parse_state(text)
        self.check_state(s)
        return s

    def _check_colour(self, colour: int) -> None:
        if not 0 <= colour < self.rank:
            raise ConfigurationError(f"colour {colour} out of range for rank {self.rank}")

    def check_state(self, s: FockState) -> None:
        if s.max_colour() >= self.rank:
            raise ConfigurationError(f"state {s} uses a colour beyond rank {self.rank}")
        if s and max(s.weights()) > self.cutoff:
            raise CutoffError(f"state {s} exceeds weight cutoff {self.cutoff}")

    def basis_keys(self, level: int) -> list[Monomial]:
        if level < 0:
            return []
        if level > self.cutoff:
            raise CutoffError(f"level {level} exceeds cutoff {self.cutoff}")
        if level not in self._basis_cache:
            self._basis_cache[level] = _coloured_monomials(level, self.rank)
        return self._basis_cache[level]

    def basis(self, level: int) -> list[FockState]:
        return [FockState._raw({k: Fraction(1)}) for k in self.basis_keys(level)]

    def dim(self, level: int) -> int:
        return len(self.basis_keys(level))

    # modes --------------------------------------------------------------
    def heisenberg(self, m: int, v: FockState, colour: int = 0) -> FockState:
        """The single mode a_colour(m) applied to v."""
        self._check_colour(colour)
        return FockState._raw({k: c for k, c in _apply_mode(v._terms, m, colour).items() if c})

    def _monomial_mode(self, ukey: Monomial, N: int, vkey: Monomial) -> dict[Monomial, Any]:
        cache_key = (ukey, N, vkey)
        hit = self._monomial_cache.get(cache_key)
        if hit is not None:
            return hit
        wv = monomial_weight(vkey)
        outw = monomial_weight(ukey) + wv - N - 1
        result: dict[Monomial, Any] = {}
        if outw < 0:
            self._monomial_cache[cache_key] = result
            return result
        if not ukey:
            if N == -1:
                result = {vkey: Fraction(1)}
            self._monomial_cache[cache_key] = result
            return result
        # Y(a(-n_1)...a(-n_k)1, z) = :prod d^{(n_i - 1)} a(z):, so u(N) is a sum
        # over mode tuples m_i with sum(m_i + n_i) = N + 1.
        k = len(ukey)
        total = N + 1 - monomial_weight(ukey)
        lo, hi = -outw, wv
        factors = list(ukey)

        def rec(i: int, remaining: int, chosen: list[int]):
            left = k - i
            if left == 0:
                if remaining == 0:
                    yield tuple(chosen)
                return
            if remaining < left * lo or remaining > left * hi:
                return
            for m in range(lo, hi + 1):
                if m == 0:
                    continue
                chosen.append(m)
                yield from rec(i + 1, remaining - m, chosen)
                chosen.pop()

        for ms in rec(0, total, []):
            coeff = 1
            for (n, _), m in zip(factors, ms):
                coeff *= binomial(-m - 1, n - 1)
            if not coeff:
                continue
            state = {vkey: Fraction(coeff)}
            # normal ordering: annihilators act first
            order = sorted(range(k), key=lambda i: -ms[i])
            for i in order:
                state = _apply_mode(state, ms[i], factors[i][1])
                if not state:
                    break
            for key, c in state.items():
                result[key] = result.get(key, 0) + c
        result = {kk: c for kk, c in result.items() if c}
        self._monomial_cache[cache_key] = result
        return result

    def mode_action(self, u: FockState, n: int, v: FockState) -> FockState:
        """u(n)v, exact.  Raises CutoffError if the result weight exceeds the cutoff."""
        out: dict[Monomial, Any] = {}
        for ukey, uc in u._terms.items():
            wu = monomial_weight(ukey)
            for vkey, vc in v._terms.items():
                outw = wu + monomial_weight(vkey) - n - 1
                if outw < 0:
                    continue
                if outw > self.cutoff:
                    raise CutoffError(
                        f"mode action lands in weight {outw} above cutoff {self.cutoff}"
                    )
                for key, c in self._monomial_mode(ukey, n, vkey).items():
                    out[key] = out.get(key, 0) + uc * vc * c
        return FockState._raw({k: c for k, c in out.items() if c})

    def virasoro(self, n: int, v: FockState) -> FockState:
        """L(n)v = omega(n+1)v."""
        return self.mode_action(self.omega, n + 1, v)

    L = virasoro

    def vertex_coefficient(self, v: FockState, target_in: int, target_out: int) -> VertexBlock:
        """The block of Y(v, y) mapping V_in to V_out (a single y-power)."""
        w = v.weight
        N = w + target_in - target_out - 1
        rows = tuple(self.basis_keys(target_out))
        cols = tuple(self.basis_keys(target_in))
        row_index = {k: i for i, k in enumerate(rows)}
        mat = [[Fraction(0)] * len(cols) for _ in rows]
        for j, ck in enumerate(cols):
            img = self.mode_action(v, N, FockState._raw({ck: Fraction(1)}))
            for key, c in img.items():
                mat[row_index[key]][j] = to_fraction(c)
        return VertexBlock(-N - 1, N, rows, cols, tuple(tuple(r) for r in mat))

    # forms --------------------------------------------------------------
    def bilinear_form(self, a: FockState, b: FockState, spec: BilinearFormSpec | None = None) -> Any:
        """The invariant form normalized by <1,1> = 1.

        Uses <a(-n)X, Y> = -alpha^{-n} <X, a(n)Y>, obtained from the quasiprimary
        adjoint formula with wt(a) = 1.
        """
        spec = spec or BilinearFormSpec()
        total: Any = Fraction(0)
        for ka, ca in a._terms.items():
            wa = monomial_weight(ka)
            for kb, cb in b._terms.items():
                if monomial_weight(kb) != wa:
                    continue
                state = {kb: Fraction(1)}
                for n, col in ka:
                    state = _apply_mode(state, n, col)
                    if not state:
                        break
                vac = state.get((), 0)
                if not vac:
                    continue
                sign = -1 if len(ka) % 2 else 1
                total = total + ca * cb * vac * sign * spec.power(-wa)
        return total

    def gram(self, level: int, spec: BilinearFormSpec | None = None) -> list[list[Any]]:
        basis = self.basis(level)
        return [[self.bilinear_form(x, y, spec) for y in basis] for x in basis]

    def dual_basis(self, level: int) -> list[tuple[FockState, FockState]]:
        """Pairs (b, bbar) with <b_i, bbar_j>_1 = delta_ij at alpha = 1.

        The Fock basis is orthogonal, so the Gram inverse is diagonal; the
        generic inversion is kept as a check of non-degeneracy.
        """
        if level in self._dual_cache:
            return self._dual_cache[level]
        basis = self.basis(level)
        gram = self.gram(level)
        inv = invert_matrix(gram)
        pairs = []
        for i, b in enumerate(basis):
            bbar = FockState.zero()
            for j, c in enumerate(basis):
                if inv[j][i]:
                    bbar = bbar + c * inv[j][i]
            pairs.append((b, bbar))
        self._dual_cache[level] = pairs
        return pairs

    def is_quasiprimary(self, u: FockState) -> bool:
        return u.is_homogeneous() and self.virasoro(1, u).is_zero()

    def adjoint_mode(self, u: FockState, n: int, spec: BilinearFormSpec | None = None) -> ModeOperator:
        """u^dagger(n) = (-1)^p alpha^{n+1-p} u(2p-n-2) for quasiprimary u of weight p."""
        spec = spec or BilinearFormSpec()
        if u.is_zero():
            return ModeOperator(self, ())
        if not self.is_quasiprimary(u):
            raise DomainError(f"{u} is not quasiprimary")
        p = u.weight
        scale = (-1) ** p * spec.power(n + 1 - p)
        return ModeOperator(self, ((u, 2 * p - n - 2, scale),))

    def zero_mode(self, v: FockState) -> ModeOperator:
        """o(v) = v(wt v - 1), additively over homogeneous components."""
        parts = tuple((comp, k - 1, Fraction(1)) for k, comp in v.components().items())
        return ModeOperator(self, parts)

    def mode_operator(self, u: FockState, n: int, scale: Any = 1) -> ModeOperator:
        return ModeOperator(self, ((u, n, scale),))


def invert_matrix(mat: list[list[Any]]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over Q; raises NonDegeneracyError when singular."""
    n = len(mat)
    a = [[to_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise NonDegeneracyError("Gram matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


# ---------------------------------------------------------------------------
# axiom checks; each returns a list of human-readable failures


def tensor_add(acc: dict, s1: FockState, s2: FockState, scale: Any = 1) -> None:
    for k1, c1 in s1.items():
        for k2, c2 in s2.items():
            key = (k1, k2)
            acc[key] = acc.get(key, 0) + scale * c1 * c2
            if not acc[key]:
                del acc[key]


def adjoint_lemma_check(voa: HeisenbergVOA, u: FockState, m: int, level: int) -> bool:
    """sum_{b in V_n} u(m)b (x) bbar == sum_{b in V_n'} b (x) u^dagger(m) bbar, n' = n+p-m-1."""
    if u.is_zero():
        return True
    p = u.weight
    lhs: dict = {}
    for b, bbar in voa.dual_basis(level):
        tensor_add(lhs, voa.mode_action(u, m, b), bbar)
    rhs: dict = {}
    other = level + p - m - 1
    if other >= 0:
        dag = voa.adjoint_mode(u, m)
        for b, bbar in voa.dual_basis(other):
            tensor_add(rhs, b, dag(bbar))
    return lhs == rhs


def commutator_check(voa: HeisenbergVOA, u: FockState, k: int, v: FockState, sample: FockState):
    """u(k)Y(v,z)w - Y(v,z)u(k)w == sum_j binom(k,j) Y(u(j)v,z) z^{k-j} w.

    Returns None on success, else the first z-power where the sides differ.
    Homogeneous u, v, sample are required.
    """
    wu, wv, ws = u.weight, v.weight, sample.weight
    jmax = wu + wv - 1
    # coefficient of z^{-n-1}: u(k)v(n)w - v(n)u(k)w = sum_j binom(k,j) (u(j)v)(n+k-j) w
    nmin = wv + ws - voa.cutoff - 1
    nmax = wv + ws - 1 + max(0, wu - k - 1)
    for n in range(min(nmin, nmax), nmax + 1):
        try:
            lhs = voa.mode_action(u, k, voa.mode_action(v, n, sample)) - voa.mode_action(
                v, n, voa.mode_action(u, k, sample)
            )
            rhs = FockState.zero()
            for j in range(0, max(jmax, 0) + 1):
                uj = voa.mode_action(u, j, v)
                if uj:
                    rhs = rhs + voa.mode_action(uj, n + k - j, sample) * binomial(k, j)
        except CutoffError:
            continue
        if lhs != rhs:
            return -n - 1
    return None


def grading_failures(voa: HeisenbergVOA, max_weight: int = 4) -> list[str]:
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            for k in range(max_weight + 1):
                for v in voa.basis(k):
                    for n in range(p + k - 1 - max_weight, p + k + 2):
                        outw = p + k - n - 1
                        if outw > voa.cutoff:
                            continue
                        res = voa.mode_action(u, n, v)
                        if res and res.weights() != {outw}:
                            fails.append(f"grading: {u}({n}){v} has weights {res.weights()}")
    return fails


def truncation_failures(voa: HeisenbergVOA, max_weight: int = 4) -> list[str]:
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            for k in range(max_weight + 1):
                for v in voa.basis(k):
                    for n in range(p + k, p + k + 4):
                        if voa.mode_action(u, n, v):
                            fails.append(f"truncation: {u}({n}){v} != 0")
    return fails


def creativity_failures(voa: HeisenbergVOA, max_weight: int = 4) -> list[str]:
    """Y(u,z)1 = u + O(z): u(-1)1 = u and u(n)1 = 0 for n >= 0."""
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            if voa.mode_action(u, -1, voa.vacuum) != u:
                fails.append(f"creativity: {u}(-1)1 != {u}")
            for n in range(0, p + 2):
                if voa.mode_action(u, n, voa.vacuum):
                    fails.append(f"creativity: {u}({n})1 != 0")
    return fails


def translation_failures(voa: HeisenbergVOA, max_weight: int = 3) -> list[str]:
    """(L(-1)u)(n) = -n u(n-1), the coefficientwise form of d/dz Y(u,z)."""
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            du = voa.virasoro(-1, u)
            for k in range(max_weight + 1):
                for v in voa.basis(k):
                    for n in range(p + k - max_weight - 1, p + k + 2):
                        if p + 1 + k - n - 1 > voa.cutoff:
                            continue
                        lhs = voa.mode_action(du, n, v)
                        rhs = voa.mode_action(u, n - 1, v) * (-n)
                        if lhs != rhs:
                            fails.append(f"translation: u={u}, n={n}, v={v}")
    return fails


def skew_symmetry_failures(voa: HeisenbergVOA, max_weight: int = 2) -> list[str]:
    """Y(u,z)v = e^{zL(-1)} Y(v,-z) u, coefficientwise.

    Coefficient of z^{-n-1}: u(n)v = sum_{i>=0} (-1)^{n+i+1} L(-1)^i/i! v(n+i)u.
    """
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            for k in range(max_weight + 1):
                for v in voa.basis(k):
                    top = p + k - 1
                    for n in range(-max_weight - 1, top + 2):
                        if p + k - n - 1 > voa.cutoff:
                            continue
                        lhs = voa.mode_action(u, n, v)
                        rhs = FockState.zero()
                        for i in range(0, top - n + 2):
                            t = voa.mode_action(v, n + i, u)
                            for _ in range(i):
                                t = voa.virasoro(-1, t)
                            if t:
                                rhs = rhs + t * Fraction(-1 if (n + i) % 2 == 0 else 1, factorial(i))
                        if lhs != rhs:
                            fails.append(f"skew: u={u}, v={v}, n={n}")
    return fails


def virasoro_failures(voa: HeisenbergVOA, max_weight: int = 3, max_mode: int = 3) -> list[str]:
    fails = []
    c = voa.central_charge
    for k in range(max_weight + 1):
        for v in voa.basis(k):
            for m in range(-max_mode, max_mode + 1):
                for n in range(-max_mode, max_mode + 1):
                    if k - m - n > voa.cutoff:
                        continue
                    lhs = voa.virasoro(m, voa.virasoro(n, v)) - voa.virasoro(n, voa.virasoro(m, v))
                    rhs = voa.virasoro(m + n, v) * (m - n)
                    if m == -n:
                        rhs = rhs + v * (c * Fraction(m**3 - m, 12))
                    if lhs != rhs:
                        fails.append(f"virasoro: [L({m}),L({n})] on {v}")
    return fails


def commutator_failures(voa: HeisenbergVOA, max_weight: int = 3) -> list[str]:
    fails = []
    for p in range(max_weight + 1):
        for u in voa.basis(p):
            for q in range(max_weight + 1 - p):
                for v in voa.basis(q):
                    for s in range(max_weight + 1 - p - q):
                        for w in voa.basis(s):
                            for k in range(-1, p + 1):
                                bad = commutator_check(voa, u, k, v, w)
                                if bad is not None:
                                    fails.append(f"commutator: u={u}, k={k}, v={v}, w={w}, z^{bad}")
    return fails


def invariance_failures(voa: HeisenbergVOA, states: Iterable[FockState] | None = None, max_weight: int = 3,
                        spec: BilinearFormSpec | None = None) -> list[str]:
    """<u(n)a, b> = <a, u^dagger(n) b> for quasiprimary u."""
    spec = spec or BilinearFormSpec()
    states = list(states) if states is not None else [voa.a(1), voa.omega]
    fails = []
    for u in states:
        p = u.weight
        for wa in range(max_weight + 1):
            for a in voa.basis(wa):
                for wb in range(max_weight + 1):
                    n = p + wa - wb - 1
                    dag = voa.adjoint_mode(u, n, spec)
                    for b in voa.basis(wb):
                        lhs = voa.bilinear_form(voa.mode_action(u, n, a), b, spec)
                        rhs = voa.bilinear_form(a, dag(b), spec)
                        if lhs != rhs:
                            fails.append(f"invariance: u={u}, n={n}, a={a}, b={b}")
    return fails


def adjoint_lemma_failures(voa: HeisenbergVOA, states: Iterable[FockState] | None = None,
                           max_weight: int = 3) -> list[str]:
    states = list(states) if states is not None else [voa.vacuum, voa.a(1), voa.omega]
    fails = []
    for u in states:
        p = u.weight
        for level in range(max_weight + 1):
            for m in range(level + p - 1 - max_weight, p + level):
                if not adjoint_lemma_check(voa, u, m, level):
                    fails.append(f"adjoint lemma: u={u}, m={m}, level={level}")
    return fails


def axiom_suite(voa: HeisenbergVOA, max_weight: int = 4, triple_weight: int = 3) -> dict[str, list[str]]:
    """Every axiom check; pairs of states up to max_weight, triples up to triple_weight."""
    return {
        "grading": grading_failures(voa, max_weight),
        "lower_truncation": truncation_failures(voa, max_weight),
        "creativity": creativity_failures(voa, max_weight),
        "translation": translation_failures(voa, max_weight),
        "skew_symmetry": skew_symmetry_failures(voa, max_weight),
        "commutator": commutator_failures(voa, triple_weight),
        "virasoro": virasoro_failures(voa, max_weight),
        "invariance": invariance_failures(voa, max_weight=triple_weight),
        "adjoint_lemma": adjoint_lemma_failures(voa, max_weight=triple_weight),
    }
