"""Exact multivariate polynomials over Q, and polynomial path sections.

Polynomials are kept in a sparse normal form: a tuple of variable names
plus a dict mapping exponent vectors to nonzero Fractions.  All arithmetic
is exact; there is no floating point anywhere in this module.

A PathSection models a tuple of polynomials in the parameter t, thought of
as a section of a (trivial) graded vector bundle pulled back along the
affine path a(t) = p + t(q - p).  Sections may carry a dt marker, in which
case the de Rham degree is raised by one.  The five operators below
(pullback, delta, eta, pi_lin, pi_con) implement the path-space calculus:

    delta   -- (-1)^d d/dt, landing in dt-sections
    eta     -- (-1)^d (int_0^t - t int_0^1), a homotopy back out of dt
    pi_lin  -- projection of a plain section onto its linear interpolation
    pi_con  -- projection of a dt-section onto its average value

so that 1 - (delta eta + eta delta) acts as pi_con on dt-sections and as
pi_lin on plain sections.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rat = Union[int, Fraction, str]


class DegreeCapError(RuntimeError):
    """Raised when a polynomial operation overflows the configured t-degree cap."""


DEFAULT_DEGREE_CAP = 16
_CAP_ENV = "LINFTY_DEGREE_CAP"


def degree_cap() -> int:
    """Current t-degree cap: LINFTY_DEGREE_CAP env var, else 16."""
    raw = os.environ.get(_CAP_ENV)
    if raw is None:
        return DEFAULT_DEGREE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DegreeCapError(f"{_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise DegreeCapError(f"{_CAP_ENV} must be positive, got {cap}")
    return cap


def as_fraction(x: Rat) -> Fraction:
    """Coerce ints, Fractions and 'num/den' strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def format_fraction(x: Fraction) -> str:
    """Render a Fraction as 'num' or 'num/den' (canonical, reduced)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Poly:
    """Sparse exact polynomial: named variables, exponent-vector -> Fraction."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping[tuple, Rat]):
        vs = tuple(vars)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable names in {vs}")
        clean: dict[tuple, Fraction] = {}
        for exps, coeff in terms.items():
            e = tuple(int(k) for k in exps)
            if len(e) != len(vs):
                raise ValueError(f"exponent vector {e} does not match variables {vs}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            c = as_fraction(coeff)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str] = ()) -> "Poly":
        return cls(vars, {})

    @classmethod
    def constant(cls, c: Rat, vars: Sequence[str] = ()) -> "Poly":
        vs = tuple(vars)
        return cls(vs, {tuple(0 for _ in vs): c})

    @classmethod
    def variable(cls, name: str, vars: Sequence[str] | None = None) -> "Poly":
        vs = (name,) if vars is None else tuple(vars)
        if name not in vs:
            raise ValueError(f"{name!r} not among variables {vs}")
        e = tuple(1 if v == name else 0 for v in vs)
        return cls(vs, {e: 1})

    @classmethod
    def monomial(cls, vars: Sequence[str], exps: Sequence[int], c: Rat = 1) -> "Poly":
        return cls(vars, {tuple(exps): c})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        if name not in self.vars or not self.terms:
            return 0
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    # -- variable alignment ------------------------------------------------

    def with_vars(self, vars: Sequence[str]) -> "Poly":
        """Reinterpret over a superset (or reordering) of the variables."""
        vs = tuple(vars)
        missing = [v for v in self.vars if v not in vs]
        if missing:
            raise ValueError(f"cannot drop variables {missing}")
        pos = [vs.index(v) for v in self.vars]
        terms: dict[tuple, Fraction] = {}
        for exps, c in self.terms.items():
            e = [0] * len(vs)
            for p, k in zip(pos, exps):
                e[p] = k
            terms[tuple(e)] = c
        return Poly(vs, terms)

    def pruned(self) -> "Poly":
        """Drop variables that do not occur in any term."""
        used = [i for i in range(len(self.vars))
                if any(e[i] for e in self.terms)]
        vs = tuple(self.vars[i] for i in used)
        return Poly(vs, {tuple(e[i] for i in used): c for e, c in self.terms.items()})

    @staticmethod
    def _aligned(a: "Poly", b: "Poly") -> tuple["Poly", "Poly"]:
        if a.vars == b.vars:
            return a, b
        vs = tuple(dict.fromkeys(a.vars + b.vars))
        return a.with_vars(vs), b.with_vars(vs)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Poly | None":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other, self.vars)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = Poly._aligned(self, o)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return Poly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = Poly._aligned(self, o)
        terms: dict[tuple, Fraction] = {}
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = terms.get(e, Fraction(0)) + ca * cb
        return Poly(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.constant(1, self.vars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = Poly._aligned(self.pruned(), o.pruned())
        return a.terms == b.terms

    def __hash__(self):
        p = self.pruned()
        return hash((p.vars, frozenset(p.terms.items())))

    # -- calculus ----------------------------------------------------------

    def diff(self, name: str) -> "Poly":
        if name not in self.vars:
            return Poly.zero(self.vars)
        i = self.vars.index(name)
        terms: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            e2 = tuple(e2)
            terms[e2] = terms.get(e2, Fraction(0)) + c * e[i]
        return Poly(self.vars, terms)

    def substitute(self, values: Mapping[str, "Poly | Rat"]) -> "Poly":
        """Substitute polynomials (or rationals) for some of the variables."""
        keep = [v for v in self.vars if v not in values]
        out_vars: list[str] = list(keep)
        subs: dict[str, Poly] = {}
        for name, val in values.items():
            p = val if isinstance(val, Poly) else Poly.constant(as_fraction(val))
            subs[name] = p
            for v in p.vars:
                if v not in out_vars:
                    out_vars.append(v)
        out = Poly.zero(tuple(out_vars))
        for e, c in self.terms.items():
            term = Poly.constant(c, tuple(out_vars))
            for v, k in zip(self.vars, e):
                if k == 0:
                    continue
                if v in subs:
                    term = term * subs[v] ** k
                else:
                    term = term * Poly.variable(v, tuple(out_vars)) ** k
            out = out + term
        return out

    def eval(self, values: Mapping[str, Rat]) -> Fraction:
        out = Fraction(0)
        for e, c in self.terms.items():
            val = c
            for v, k in zip(self.vars, e):
                if k == 0:
                    continue
                if v not in values:
                    raise ValueError(f"no value supplied for variable {v!r}")
                val = val * as_fraction(values[v]) ** k
            out += val
        return out

    # -- rendering ---------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True):
            factors = []
            for v, k in zip(self.vars, e):
                if k == 1:
                    factors.append(v)
                elif k > 1:
                    factors.append(f"{v}^{k}")
            mono = "*".join(factors)
            cs = format_fraction(c)
            if mono:
                if cs == "1":
                    bits.append(mono)
                elif cs == "-1":
                    bits.append(f"-{mono}")
                else:
                    bits.append(f"{cs}*{mono}")
            else:
                bits.append(cs)
        out = " + ".join(bits)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self})"


def poly_t(expr_terms: Mapping[int, Rat]) -> Poly:
    """Univariate polynomial in t from {power: coefficient}."""
    return Poly(("t",), {(k,): v for k, v in expr_terms.items()})


# ---------------------------------------------------------------------------
# path sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSection:
    """Polynomial section along the affine path a(t) = p + t(q - p).

    components are polynomials in the single variable t; degree is the
    degree of the underlying graded piece, dt marks a one-form section.
    """

    start: tuple[Fraction, ...]
    end: tuple[Fraction, ...]
    degree: int
    dt: bool
    components: tuple[Poly, ...]

    @staticmethod
    def make(start: Sequence[Rat], end: Sequence[Rat], degree: int,
             components: Iterable[Poly], dt: bool = False) -> "PathSection":
        p = tuple(as_fraction(x) for x in start)
        q = tuple(as_fraction(x) for x in end)
        comps = tuple(c.with_vars(("t",)) if c.vars != ("t",) else c for c in components)
        cap = degree_cap()
        for c in comps:
            if c.degree_in("t") > cap:
                raise DegreeCapError(
                    f"t-degree {c.degree_in('t')} exceeds cap {cap} "
                    f"(set {_CAP_ENV} to raise it)")
        return PathSection(p, q, degree, dt, comps)

    def value_at(self, t0: Rat) -> tuple[Fraction, ...]:
        t = as_fraction(t0)
        return tuple(c.eval({"t": t}) for c in self.components)


def _int_0_to_t(c: Poly) -> Poly:
    """Antiderivative in t vanishing at t = 0."""
    terms: dict[tuple, Fraction] = {}
    for e, coeff in c.with_vars(("t",)).terms.items():
        terms[(e[0] + 1,)] = coeff / (e[0] + 1)
    return Poly(("t",), terms)


def _int_0_to_1(c: Poly) -> Fraction:
    return _int_0_to_t(c).eval({"t": 1})


def pullback(coeffs: Sequence[Poly], coords: Sequence[str],
             start: Sequence[Rat], end: Sequence[Rat],
             degree: int, dt: bool = False) -> PathSection:
    """Restrict polynomial coefficient functions along a(t) = p + t(q-p)."""
    p = [as_fraction(x) for x in start]
    q = [as_fraction(x) for x in end]
    if len(p) != len(coords) or len(q) != len(coords):
        raise ValueError("endpoint dimension does not match coordinates")
    t = Poly.variable("t")
    subs = {name: Poly.constant(pi) + t * (qi - pi)
            for name, pi, qi in zip(coords, p, q)}
    comps = []
    for c in coeffs:
        r = c.substitute(subs)
        extra = [v for v in r.pruned().vars if v != "t"]
        if extra:
            raise ValueError(f"coefficients involve unknown variables {extra}")
        comps.append(r.with_vars(("t",)) if r.vars != ("t",) else r)
    return PathSection.make(p, q, degree, comps, dt=dt)


def path_delta(s: PathSection) -> PathSection:
    """Covariant t-derivative: (-1)^d d/dt, raising the dt flag."""
    if s.dt:
        raise ValueError("delta of a dt-section is zero (and typed out)")
    sign = -1 if s.degree % 2 else 1
    comps = [sign * c.diff("t") for c in s.components]
    return PathSection.make(s.start, s.end, s.degree, comps, dt=True)


def path_eta(s: PathSection) -> PathSection:
    """Homotopy (-1)^k (int_0^t - t int_0^1) from dt-sections back to sections."""
    if not s.dt:
        raise ValueError("eta only acts on dt-sections")
    sign = -1 if s.degree % 2 else 1
    t = Poly.variable("t")
    comps = [sign * (_int_0_to_t(c) - t * _int_0_to_1(c)) for c in s.components]
    return PathSection.make(s.start, s.end, s.degree, comps, dt=False)


def pi_lin(s: PathSection) -> PathSection:
    """Linear interpolation (1-t) s(0) + t s(1) of a plain section."""
    if s.dt:
        raise ValueError("pi_lin only acts on plain sections")
    t = Poly.variable("t")
    comps = []
    for c in s.components:
        v0 = c.eval({"t": 0})
        v1 = c.eval({"t": 1})
        comps.append(Poly.constant(v0) + t * (v1 - v0))
    return PathSection.make(s.start, s.end, s.degree, comps, dt=False)


def pi_con(s: PathSection) -> PathSection:
    """Average value int_0^1 s, as a constant dt-section."""
    if not s.dt:
        raise ValueError("pi_con only acts on dt-sections")
    comps = [Poly.constant(_int_0_to_1(c), ("t",)) for c in s.components]
    return PathSection.make(s.start, s.end, s.degree, comps, dt=True)
