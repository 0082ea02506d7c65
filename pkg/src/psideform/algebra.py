"""Exact sparse polynomials on a split coordinate patch.

A patch carries base coordinates ``x`` (the submanifold) and linear fiber
coordinates ``y`` (its normal bundle).  Coefficient functions are stored as
polynomials with :class:`fractions.Fraction` coefficients; terms whose total
fiber degree exceeds the patch ``jet_order`` are discarded, which models
functions on the formal neighborhood of ``y = 0``.  Base dependence is never
truncated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Rational = Fraction
Monomial = Tuple[int, ...]


class AlgebraError(ValueError):
    """Raised on malformed polynomial input or mismatched patches."""


class SplitMismatch(AlgebraError):
    pass


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise AlgebraError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, _RationalABC):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            if int(den) == 0:
                raise AlgebraError("zero denominator")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    raise AlgebraError(f"cannot use {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class PatchSplit:
    """Coordinate names of a patch: base variables, fiber variables, jet order."""

    base_vars: Tuple[str, ...]
    fiber_vars: Tuple[str, ...] = ()
    jet_order: int = 0
    _index: Dict[str, int] = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        object.__setattr__(self, "fiber_vars", tuple(self.fiber_vars))
        names = self.base_vars + self.fiber_vars
        if len(set(names)) != len(names):
            raise AlgebraError(f"duplicate variable names in {names}")
        if self.jet_order < 0:
            raise AlgebraError("jet_order must be non-negative")
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(names)})

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.base_vars + self.fiber_vars

    @property
    def dim(self) -> int:
        return len(self.base_vars) + len(self.fiber_vars)

    @property
    def nbase(self) -> int:
        return len(self.base_vars)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AlgebraError(f"unknown variable {name!r}") from None

    def is_fiber(self, i: int) -> bool:
        return i >= len(self.base_vars)

    def fiber_degree(self, mono: Monomial) -> int:
        return sum(mono[len(self.base_vars):])

    def zero_monomial(self) -> Monomial:
        return (0,) * self.dim


def _grlex_key(mono: Monomial):
    # descending total degree, then lexicographic in declared variable order
    return (-sum(mono), tuple(-e for e in mono))


def _add_mono(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class JetPoly:
    """Immutable polynomial over the rationals on a :class:`PatchSplit`.

    ``terms`` maps exponent vectors (one entry per patch variable) to
    non-zero Fractions.  The mapping is always built in graded-lex order so
    equal values have identical representations.
    """

    __slots__ = ("split", "terms", "_hash")

    def __init__(self, split: PatchSplit, terms: Mapping[Monomial, object] = None):
        clean = {}
        if terms:
            n = split.dim
            for mono, c in terms.items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != n or min(mono, default=0) < 0:
                    raise AlgebraError(f"bad exponent vector {mono} for {n} variables")
                c = as_rational(c)
                if c and split.fiber_degree(mono) <= split.jet_order:
                    clean[mono] = clean.get(mono, 0) + c
        self._set(split, clean)

    def _set(self, split, clean):
        self.split = split
        self.terms = {m: clean[m] for m in sorted(clean, key=_grlex_key) if clean[m]}
        self._hash = None

    @classmethod
    def _raw(cls, split: PatchSplit, terms: Dict[Monomial, Fraction]) -> "JetPoly":
        # trusted constructor: exponents valid, truncation already applied
        obj = cls.__new__(cls)
        obj._set(split, terms)
        return obj

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, split: PatchSplit) -> "JetPoly":
        return cls._raw(split, {})

    @classmethod
    def const(cls, split: PatchSplit, c) -> "JetPoly":
        c = as_rational(c)
        return cls._raw(split, {split.zero_monomial(): c} if c else {})

    @classmethod
    def var(cls, split: PatchSplit, name: str) -> "JetPoly":
        i = split.index(name)
        mono = [0] * split.dim
        mono[i] = 1
        return cls(split, {tuple(mono): 1})

    @classmethod
    def monomial(cls, split: PatchSplit, exps: Mapping[str, int], coeff=1) -> "JetPoly":
        mono = [0] * split.dim
        for name, e in exps.items():
            mono[split.index(name)] += e
        return cls(split, {tuple(mono): coeff})

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(self.split.zero_monomial(), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def fiber_degree(self) -> int:
        return max((self.split.fiber_degree(m) for m in self.terms), default=-1)

    def is_base_only(self) -> bool:
        return self.fiber_degree() <= 0

    def is_constant(self) -> bool:
        return self.degree() <= 0

    def __eq__(self, other):
        if isinstance(other, JetPoly):
            return self.split == other.split and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == JetPoly.const(self.split, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.split, tuple(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"JetPoly({self.to_text()})"

    def to_text(self) -> str:
        """Canonical infix rendering, e.g. ``x1^2 - 1/2*x1*y1 + 3``."""
        if not self.terms:
            return "0"
        names = self.split.variables
        parts = []
        for mono, c in self.terms.items():
            factors = []
            for name, e in zip(names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = format_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = format_rational(mag) + "*" + "*".join(factors)
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "JetPoly"):
        if self.split != other.split:
            raise SplitMismatch("polynomials live on different patches")

    def _coerce(self, other) -> "JetPoly":
        if isinstance(other, JetPoly):
            self._check(other)
            return other
        return JetPoly.const(self.split, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return JetPoly._raw(self.split, out)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly._raw(self.split, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "JetPoly":
        c = as_rational(c)
        if not c:
            return JetPoly.zero(self.split)
        return JetPoly._raw(self.split, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, JetPoly):
            return self.scale(other)
        return poly_mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(1 / as_rational(other))

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise AlgebraError("only non-negative integer powers")
        result = JetPoly.const(self.split, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def diff(self, var) -> "JetPoly":
        return poly_diff(self, var)

    def eval(self, point) -> Fraction:
        return poly_eval(self, point)

    def subst(self, mapping) -> "JetPoly":
        return poly_subst(self, mapping)

    def restrict_to_base(self) -> "JetPoly":
        """Set every fiber variable to zero."""
        nb = self.split.nbase
        return JetPoly._raw(self.split, {m: c for m, c in self.terms.items() if not any(m[nb:])})


def poly_mul(a: JetPoly, b: JetPoly) -> JetPoly:
    a._check(b)
    split = a.split
    if not a.terms or not b.terms:
        return JetPoly.zero(split)
    nb, T = split.nbase, split.jet_order
    out: Dict[Monomial, Fraction] = {}
    bt = [(m, c, sum(m[nb:])) for m, c in b.terms.items()]
    for ma, ca in a.terms.items():
        fa = sum(ma[nb:])
        for mb, cb, fb in bt:
            if fa + fb > T:
                continue
            m = _add_mono(ma, mb)
            out[m] = out.get(m, 0) + ca * cb
    return JetPoly._raw(split, out)


def poly_diff(p: JetPoly, var) -> JetPoly:
    i = var if isinstance(var, int) else p.split.index(var)
    if not 0 <= i < p.split.dim:
        raise AlgebraError(f"variable index {i} out of range")
    out = {}
    for m, c in p.terms.items():
        e = m[i]
        if e:
            nm = m[:i] + (e - 1,) + m[i + 1:]
            out[nm] = c * e
    return JetPoly._raw(p.split, out)


@dataclass(frozen=True)
class Point:
    """A point of a patch, given by exact coordinates for every variable."""

    split: PatchSplit
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(as_rational(c) for c in self.coords)
        if len(coords) != self.split.dim:
            raise AlgebraError(f"point needs {self.split.dim} coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_mapping(cls, split: PatchSplit, values: Mapping[str, object]) -> "Point":
        missing = [v for v in split.variables if v not in values]
        if missing:
            raise AlgebraError(f"missing coordinate(s): {', '.join(missing)}")
        return cls(split, tuple(values[v] for v in split.variables))

    @classmethod
    def origin(cls, split: PatchSplit) -> "Point":
        return cls(split, (0,) * split.dim)

    def __getitem__(self, name: str) -> Fraction:
        return self.coords[self.split.index(name)]

    def on_zero_section(self) -> bool:
        return not any(self.coords[self.split.nbase:])


def poly_eval(p: JetPoly, pt) -> Fraction:
    if isinstance(pt, Mapping):
        pt = Point.from_mapping(p.split, pt)
    if pt.split != p.split:
        # allow evaluation with a point given on an equal-named patch
        if pt.split.variables != p.split.variables:
            raise SplitMismatch("point and polynomial live on different patches")
    xs = pt.coords
    total = Fraction(0)
    for m, c in p.terms.items():
        v = c
        for x, e in zip(xs, m):
            if e:
                v *= x ** e
        total += v
    return total


def poly_subst(p: JetPoly, mapping: Mapping[str, JetPoly]) -> JetPoly:
    """Substitute polynomials for variables; unmapped variables stay put."""
    split = p.split
    images = {}
    for name, img in mapping.items():
        i = split.index(name)
        if not isinstance(img, JetPoly):
            img = JetPoly.const(split, img)
        elif img.split != split:
            raise SplitMismatch("substitution image lives on a different patch")
        images[i] = img
    if not images:
        return p
    powers: Dict[Tuple[int, int], JetPoly] = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = images[i] ** e
        return powers[key]

    result = JetPoly.zero(split)
    one = split.zero_monomial()
    for m, c in p.terms.items():
        kept = tuple(0 if i in images else e for i, e in enumerate(m))
        term = JetPoly(split, {kept: c}) if kept != one else JetPoly.const(split, c)
        for i, e in enumerate(m):
            if e and i in images:
                term = term * power(i, e)
                if term.is_zero():
                    break
        result = result + term
    return result


def monomials_up_to(nvars: int, degree: int) -> Iterable[Tuple[int, ...]]:
    """Exponent vectors in ``nvars`` variables of total degree <= degree, grlex ascending."""
    def rec(k, remaining):
        if k == 1:
            yield (remaining,)
            return
        for e in range(remaining, -1, -1):
            for rest in rec(k - 1, remaining - e):
                yield (e,) + rest

    if nvars == 0:
        yield ()
        return
    for d in range(degree + 1):
        yield from rec(nvars, d)


def base_monomial(split: PatchSplit, base_exps: Sequence[int]) -> Monomial:
    return tuple(base_exps) + (0,) * len(split.fiber_vars)
