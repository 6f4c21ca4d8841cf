"""Universal genus-g Zhu reduction kernels.

Everything here depends only on the genus g, the weight p of the reduced
quasiprimary, the Schottky centres w_a (a in I = {1, -1, ..., g, -g}), the
formal parameters rho_a and the Laurent polynomials f_0..f_{2p-2}.  No VOA
object is referenced.

Derivatives use divided powers: d^{(i,j)} = d_x^i d_y^j / (i! j!).
Centres and evaluation points may be Fractions or elements of one sympy
rational function field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Any, Callable, Iterable, Iterator, Mapping

from .exactalg import (
    ConfigurationError,
    DiffForm,
    PoleError,
    TruncatedSeries,
    binomial,
    coeff_to_json,
    to_fraction,
)

Index = tuple[int, int]  # (a, m) with a in I and 0 <= m <= M


def handle_indices(genus: int) -> tuple[int, ...]:
    """I = (1, -1, 2, -2, ..., g, -g)."""
    out: list[int] = []
    for a in range(1, genus + 1):
        out += [a, -a]
    return tuple(out)


def _pow(v: Any, e: int) -> Any:
    if e >= 0:
        return v**e
    if not v:
        raise PoleError("negative power of zero")
    if isinstance(v, (int, Fraction)):
        return Fraction(1) / to_fraction(v) ** (-e)
    return 1 / v ** (-e)


def _nonzero_diff(x: Any, y: Any) -> Any:
    d = x - y
    if not d:
        raise PoleError(f"coincident points {x} and {y}")
    return d


LaurentPoly = Mapping[int, Any]


def laurent_divided_derivative(f: LaurentPoly, m: int, x: Any) -> Any:
    """d^{(m)} f evaluated at x, for f = sum_e c_e x^e."""
    total: Any = Fraction(0)
    for e, c in f.items():
        b = binomial(e, m)
        if b and c:
            total = total + c * b * _pow(x, e - m)
    return total


@dataclass(frozen=True)
class KernelConfig:
    """Parameters of the reduction kernel.

    ``f_coeffs[l]`` is a Laurent polynomial {exponent: coefficient}; missing
    entries are zero.  ``mode_cutoff`` defaults to 2T + 2p.
    """

    genus: int
    weight: int
    order: Fraction
    mode_cutoff: int | None = None
    f_coeffs: tuple[Mapping[int, Any], ...] = ()

    def __post_init__(self):
        if self.genus < 1:
            raise ConfigurationError("genus must be positive")
        if self.weight < 1:
            raise ConfigurationError("the kernel needs a quasiprimary of positive weight")
        order = Fraction(self.order)
        if (2 * order).denominator != 1 or order < 0:
            raise ConfigurationError(f"order {self.order} is not a nonnegative half-integer")
        object.__setattr__(self, "order", order)
        minimum = int(2 * order) + 2 * self.weight
        if self.mode_cutoff is None:
            object.__setattr__(self, "mode_cutoff", minimum)
        elif self.mode_cutoff < minimum:
            raise ConfigurationError(f"mode cutoff {self.mode_cutoff} is below 2T + 2p = {minimum}")
        if len(self.f_coeffs) > 2 * self.weight - 1:
            raise ConfigurationError(f"at most {2 * self.weight - 1} Laurent polynomials f_l")
        fs = tuple(dict(f) for f in self.f_coeffs)
        fs += tuple({} for _ in range(2 * self.weight - 1 - len(fs)))
        object.__setattr__(self, "f_coeffs", fs)

    @property
    def order2(self) -> int:
        return int(2 * self.order)

    @property
    def indices(self) -> list[Index]:
        return [(a, m) for a in handle_indices(self.genus) for m in range(self.mode_cutoff + 1)]

    @property
    def resolvent_terms(self) -> int:
        return ceil(Fraction(2) * self.order / (2 * self.weight - 1))

    def with_cutoff(self, M: int) -> "KernelConfig":
        return KernelConfig(self.genus, self.weight, self.order, M, self.f_coeffs)


# ---------------------------------------------------------------------------
# sparse mode-indexed containers


class ModeIndexedVector:
    """Sparse vector over (a, m); missing entries are zero series."""

    def __init__(self, genus: int, order: Any, entries: Mapping[Index, Any] | None = None, max_mode: int | None = None):
        self.genus = genus
        self.order = Fraction(order)
        self.max_mode = max_mode
        self.entries: dict[Index, Any] = {}
        for k, v in (entries or {}).items():
            self._check(k)
            if v:
                self.entries[k] = v

    def _check(self, k: Index) -> None:
        a, m = k
        if a == 0 or abs(a) > self.genus or m < 0 or (self.max_mode is not None and m > self.max_mode):
            raise IndexError(f"mode index {k} out of range")

    def __getitem__(self, k: Index) -> Any:
        self._check(k)
        hit = self.entries.get(k)
        return hit if hit is not None else TruncatedSeries.zero(self.genus, self.order)

    def items(self):
        return self.entries.items()

    def __len__(self) -> int:
        return len(self.entries)

    def __matmul__(self, other: "ModeIndexedMatrix | ModeIndexedVector") -> Any:
        if isinstance(other, ModeIndexedVector):
            total = TruncatedSeries.zero(self.genus, self.order)
            for k, v in self.entries.items():
                w = other.entries.get(k)
                if w is not None:
                    total = total + v * w
            return total
        out: dict[Index, Any] = {}
        for k, v in self.entries.items():
            for col, w in other.row(k).items():
                t = v * w
                out[col] = out[col] + t if col in out else t
        return ModeIndexedVector(self.genus, self.order, out, other.max_mode)

    def __add__(self, other: "ModeIndexedVector") -> "ModeIndexedVector":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return ModeIndexedVector(self.genus, min(self.order, other.order), out, self.max_mode)

    def to_json(self) -> dict:
        return {
            f"{a},{m}": v.to_json() if isinstance(v, TruncatedSeries) else v.to_json()
            for (a, m), v in sorted(self.entries.items(), key=lambda kv: (abs(kv[0][0]), -kv[0][0], kv[0][1]))
        }


class ModeIndexedMatrix:
    """Sparse matrix over ((a, m), (b, n)) with series entries."""

    def __init__(self, genus: int, order: Any, entries: Mapping[tuple[Index, Index], TruncatedSeries] | None = None,
                 max_mode: int | None = None):
        self.genus = genus
        self.order = Fraction(order)
        self.max_mode = max_mode
        self._rows: dict[Index, dict[Index, TruncatedSeries]] = {}
        for (r, c), v in (entries or {}).items():
            if v:
                self._rows.setdefault(r, {})[c] = v

    @classmethod
    def identity(cls, genus: int, order: Any, indices: Iterable[Index], max_mode: int | None = None):
        one = TruncatedSeries.one(genus, order)
        return cls(genus, order, {(i, i): one for i in indices}, max_mode)

    def row(self, r: Index) -> dict[Index, TruncatedSeries]:
        return self._rows.get(r, {})

    def __getitem__(self, key: tuple[Index, Index]) -> TruncatedSeries:
        r, c = key
        hit = self._rows.get(r, {}).get(c)
        return hit if hit is not None else TruncatedSeries.zero(self.genus, self.order)

    def items(self) -> Iterator[tuple[tuple[Index, Index], TruncatedSeries]]:
        for r, cols in self._rows.items():
            for c, v in cols.items():
                yield (r, c), v

    def __len__(self) -> int:
        return sum(len(c) for c in self._rows.values())

    def is_zero(self) -> bool:
        return not self._rows

    def __matmul__(self, other: "ModeIndexedMatrix") -> "ModeIndexedMatrix":
        out: dict[tuple[Index, Index], TruncatedSeries] = {}
        for r, cols in self._rows.items():
            acc: dict[Index, TruncatedSeries] = {}
            for k, v in cols.items():
                for c, w in other.row(k).items():
                    t = v * w
                    acc[c] = acc[c] + t if c in acc else t
            for c, v in acc.items():
                out[(r, c)] = v
        return ModeIndexedMatrix(self.genus, min(self.order, other.order), out, self.max_mode)

    def _combine(self, other: "ModeIndexedMatrix", sign: int) -> "ModeIndexedMatrix":
        out = {k: v for k, v in self.items()}
        for k, v in other.items():
            out[k] = out[k] + v * sign if k in out else v * sign
        return ModeIndexedMatrix(self.genus, min(self.order, other.order), out, self.max_mode)

    def __add__(self, other: "ModeIndexedMatrix") -> "ModeIndexedMatrix":
        return self._combine(other, 1)

    def __sub__(self, other: "ModeIndexedMatrix") -> "ModeIndexedMatrix":
        return self._combine(other, -1)

    def truncate(self, order: Any) -> "ModeIndexedMatrix":
        return ModeIndexedMatrix(self.genus, order, {k: v.truncate(order) for k, v in self.items()}, self.max_mode)

    def min_valuation(self) -> Fraction | None:
        vals = [v.valuation for _, v in self.items()]
        return min(vals) if vals else None

    def equals(self, other: "ModeIndexedMatrix") -> bool:
        keys = {k for k, _ in self.items()} | {k for k, _ in other.items()}
        return all(self[k] == other[k] for k in keys)

    def to_json(self) -> dict:
        return {
            f"{r[0]},{r[1]};{c[0]},{c[1]}": v.to_json()
            for (r, c), v in sorted(self.items())
        }


# ---------------------------------------------------------------------------
# kernel


@dataclass(frozen=True)
class ChiTheta:
    chi: dict[Index, TruncatedSeries]          # window 0 <= l <= 2p-2, all a in I
    chi_full: dict[Index, TruncatedSeries]     # every m <= M, before windowing
    theta: dict[Index, TruncatedSeries]        # a = 1..g
    Theta: dict[Index, DiffForm]


class ZhuKernel:
    """Kernel data for one configuration and one choice of centres w_a.

    Half-integer rho exponents are handled by the series type; matrix
    entries whose rho-degree exceeds the configured order are dropped.
    """

    def __init__(self, cfg: KernelConfig, centers: Mapping[int, Any]):
        self.cfg = cfg
        self.genus = cfg.genus
        self.p = cfg.weight
        self.M = cfg.mode_cutoff
        for a in handle_indices(cfg.genus):
            if a not in centers:
                raise ConfigurationError(f"missing centre w_{a}")
        self.w = dict(centers)
        self._resolvent: ModeIndexedMatrix | None = None
        self._rtilde: ModeIndexedMatrix | None = None
        self._row_cache: dict[Any, ModeIndexedVector] = {}

    # scalar kernels -------------------------------------------------------
    @property
    def sign(self) -> int:
        return -1 if self.p % 2 else 1

    def psi0(self, x: Any, y: Any, i: int = 0, j: int = 0) -> Any:
        """d^{(i,j)} psi^{(0)}_p(x, y) = d^{(i,j)} [1/(x-y) + sum_l f_l(x) y^l]."""
        d = _nonzero_diff(x, y)
        s = -1 if i % 2 else 1
        val = _pow(d, -i - j - 1) * (s * binomial(i + j, i))
        for l, f in enumerate(self.cfg.f_coeffs):
            if not f:
                continue
            b = binomial(l, j)
            if b:
                val = val + laurent_divided_derivative(f, i, x) * b * _pow(y, l - j)
        return val

    def E(self, m: int, n: int, y: Any) -> Any:
        """E_m^n(y) = sum_l d^{(m)} f_l(y) d^{(n)} y^l."""
        total: Any = Fraction(0)
        for l, f in enumerate(self.cfg.f_coeffs):
            if not f:
                continue
            b = binomial(l, n)
            if b:
                total = total + laurent_divided_derivative(f, m, y) * b * _pow(y, l - n)
        return total

    def _mono(self, exps2: Iterable[tuple[int, int]], c: Any) -> TruncatedSeries:
        """c * prod rho_{|a|}^{e/2} over (a, e) pairs."""
        key = [0] * self.genus
        for a, e in exps2:
            key[abs(a) - 1] += e
        if sum(key) > self.cfg.order2 or not c:
            return TruncatedSeries.zero(self.genus, self.cfg.order)
        return TruncatedSeries._raw(self.genus, self.cfg.order2, {tuple(key): c})

    # vectors and matrices ---------------------------------------------------
    def p_entry(self, a: int, m: int, x: Any) -> TruncatedSeries:
        """p_a(x, m) = rho_a^{m/2} d^{(0,m)} psi^{(0)}(x, w_a)."""
        if m > self.cfg.order2:
            return TruncatedSeries.zero(self.genus, self.cfg.order)
        return self._mono(((a, m),), self.psi0(x, self.w[a], 0, m))

    def q_entry(self, a: int, m: int, y: Any, deriv: int = 0) -> TruncatedSeries:
        """d^{(deriv)}_y q_a(y; m) = (-1)^p rho_a^{(m+1)/2} d^{(m,deriv)} psi^{(0)}(w_{-a}, y)."""
        if m + 1 > self.cfg.order2:
            return TruncatedSeries.zero(self.genus, self.cfg.order)
        return self._mono(((a, m + 1),), self.sign * self.psi0(self.w[-a], y, m, deriv))

    def R_entry(self, a: int, m: int, b: int, n: int) -> TruncatedSeries:
        if m + 1 + n > self.cfg.order2:
            return TruncatedSeries.zero(self.genus, self.cfg.order)
        if a == -b:
            c = self.E(m, n, self.w[-a])
        else:
            c = self.psi0(self.w[-a], self.w[b], m, n)
        return self._mono(((a, m + 1), (b, n)), self.sign * c)

    def p_vector(self, x: Any, max_mode: int | None = None) -> ModeIndexedVector:
        M = self.M if max_mode is None else max_mode
        entries = {(a, m): self.p_entry(a, m, x) for a in handle_indices(self.genus) for m in range(M + 1)}
        return ModeIndexedVector(self.genus, self.cfg.order, entries)

    def ptilde_vector(self, x: Any) -> ModeIndexedVector:
        """(p Delta)_a(m) = p_a(x, m + 2p - 1)."""
        shift = 2 * self.p - 1
        entries = {(a, m): self.p_entry(a, m + shift, x) for a in handle_indices(self.genus) for m in range(self.M + 1)}
        return ModeIndexedVector(self.genus, self.cfg.order, entries, self.M)

    def q_vector(self, y: Any, deriv: int = 0) -> ModeIndexedVector:
        entries = {(a, m): self.q_entry(a, m, y, deriv) for a in handle_indices(self.genus) for m in range(self.M + 1)}
        return ModeIndexedVector(self.genus, self.cfg.order, entries, self.M)

    def R_matrix(self, max_col: int | None = None) -> ModeIndexedMatrix:
        """R over rows (a, m <= M) and columns (b, n <= max_col)."""
        N = self.M if max_col is None else max_col
        entries = {}
        for a in handle_indices(self.genus):
            for m in range(self.M + 1):
                for b in handle_indices(self.genus):
                    for n in range(N + 1):
                        v = self.R_entry(a, m, b, n)
                        if v:
                            entries[((a, m), (b, n))] = v
        return ModeIndexedMatrix(self.genus, self.cfg.order, entries)

    def delta_matrix(self, max_row: int | None = None) -> ModeIndexedMatrix:
        """Delta_{ab}(m, n) = delta_{m, n+2p-1} delta_{ab}, rows m <= max_row."""
        N = self.M + 2 * self.p - 1 if max_row is None else max_row
        one = TruncatedSeries.one(self.genus, self.cfg.order)
        entries = {}
        for a in handle_indices(self.genus):
            for n in range(self.M + 1):
                m = n + 2 * self.p - 1
                if m <= N:
                    entries[((a, m), (a, n))] = one
        return ModeIndexedMatrix(self.genus, self.cfg.order, entries)

    def R_tilde(self) -> ModeIndexedMatrix:
        """R Delta on 0..M, i.e. R_{ab}(m, n + 2p - 1)."""
        if self._rtilde is None:
            shift = 2 * self.p - 1
            entries = {}
            for a in handle_indices(self.genus):
                for m in range(self.M + 1):
                    for b in handle_indices(self.genus):
                        for n in range(self.M + 1):
                            v = self.R_entry(a, m, b, n + shift)
                            if v:
                                entries[((a, m), (b, n))] = v
            self._rtilde = ModeIndexedMatrix(self.genus, self.cfg.order, entries, self.M)
        return self._rtilde

    def identity(self) -> ModeIndexedMatrix:
        return ModeIndexedMatrix.identity(self.genus, self.cfg.order, self.cfg.indices, self.M)

    def resolvent(self) -> ModeIndexedMatrix:
        """sum_{k=0}^{K} Rtilde^k with K = ceil(2T/(2p-1))."""
        if self._resolvent is None:
            rt = self.R_tilde()
            total = self.identity()
            power = self.identity()
            for _ in range(self.cfg.resolvent_terms):
                power = power @ rt
                if power.is_zero():
                    break
                total = total + power
            self._resolvent = total
        return self._resolvent

    def telescoping_defect(self) -> tuple[ModeIndexedMatrix, ModeIndexedMatrix]:
        """Return ((I - Rt) res, Rt^{K+1}); the first equals I - the second."""
        rt = self.R_tilde()
        lhs = (self.identity() - rt) @ self.resolvent()
        power = self.identity()
        for _ in range(self.cfg.resolvent_terms + 1):
            power = power @ rt
        return lhs, power

    def telescoping_exact(self) -> bool:
        """(I - Rt) res = I - Rt^{K+1} exactly, and Rt^{K+1} vanishes through order T."""
        lhs, power = self.telescoping_defect()
        T = self.cfg.order
        closed = lhs.equals(self.identity() - power)
        return closed and all(v.truncate(T).is_zero() for _, v in power.items()) and \
            lhs.truncate(T).equals(self.identity().truncate(T))

    def _row(self, x: Any) -> ModeIndexedVector:
        hit = self._row_cache.get(x)
        if hit is None:
            hit = self.ptilde_vector(x) @ self.resolvent()
            self._row_cache[x] = hit
        return hit

    def psi_series(self, x: Any, y: Any, deriv: int = 0) -> TruncatedSeries:
        """d^{(0,deriv)} psi_p(x, y) with psi_p = psi^{(0)} + ptilde (I - Rt)^{-1} q."""
        total = TruncatedSeries.constant(self.genus, self.cfg.order, self.psi0(x, y, 0, deriv))
        for (a, m), v in self._row(x).items():
            q = self.q_entry(a, m, y, deriv)
            if q:
                total = total + v * q
        return total.truncate(self.cfg.order) if total.order > self.cfg.order else total

    def psi_full(self, x: Any, y: Any, deriv: int = 0, names: tuple[str, str] = ("x", "y")) -> DiffForm:
        """d^{(0,deriv)} Psi_p(x, y) as a form dx^p dy^{1-p}."""
        return DiffForm(self.psi_series(x, y, deriv), {names[0]: self.p, names[1]: 1 - self.p})

    def chi_theta(self, x: Any, names: str = "x") -> ChiTheta:
        sh = self.ptilde_vector(x) @ self.resolvent()
        R = self.R_matrix()
        corr = sh @ R
        base = self.p_vector(x)
        chi_full: dict[Index, TruncatedSeries] = {}
        for a in handle_indices(self.genus):
            for m in range(self.M + 1):
                v = base[(a, m)] + corr[(a, m)]
                shift = [0] * self.genus
                shift[abs(a) - 1] = -m
                chi_full[(a, m)] = v.mul_monomial2(tuple(shift))
        window = range(2 * self.p - 1)
        chi = {(a, l): chi_full[(a, l)] for a in handle_indices(self.genus) for l in window}
        theta: dict[Index, TruncatedSeries] = {}
        Theta: dict[Index, DiffForm] = {}
        for a in range(1, self.genus + 1):
            for l in window:
                shift = [0] * self.genus
                shift[a - 1] = 2 * (self.p - 1 - l)
                partner = chi[(-a, 2 * self.p - 2 - l)].mul_monomial2(tuple(shift), self.sign)
                theta[(a, l)] = chi[(a, l)] + partner
                Theta[(a, l)] = DiffForm(theta[(a, l)], {names: self.p})
        return ChiTheta(chi, chi_full, theta, Theta)


def kernel_summary(kernel: ZhuKernel, x: Any, y: Any) -> dict:
    """JSON-ready dump of p, q, R, Delta, psi and theta at given points."""
    ct = kernel.chi_theta(x)
    return {
        "genus": kernel.genus,
        "weight": kernel.p,
        "order": str(kernel.cfg.order),
        "mode_cutoff": kernel.M,
        "p": kernel.p_vector(x).to_json(),
        "q": kernel.q_vector(y).to_json(),
        "R": kernel.R_matrix().to_json(),
        "Delta": kernel.delta_matrix(kernel.M).to_json(),
        "psi": kernel.psi_series(x, y).to_json(),
        "theta": {f"{a},{l}": v.to_json() for (a, l), v in sorted(ct.theta.items())},
    }
