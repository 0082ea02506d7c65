"""Scalar and tangent-valued differential forms on a coordinate patch.

Forms are sparse maps from strictly increasing index tuples (positions in
``split.variables``) to :class:`JetPoly` coefficients.  A ``VectorForm`` of
degree ``k`` is ``sum c_{I,j} dx^I (x) d/dx^j``.

The Frolicher-Nijenhuis bracket is computed through the derivation it
induces: ``L_{[K,L]} = [L_K, L_L]`` and ``L_M(x^j) = M^j``, so the ``j``-th
component of ``[K,L]`` is the graded commutator applied to the coordinate
function ``x^j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .algebra import (
    AlgebraError,
    JetPoly,
    PatchSplit,
    Point,
    SplitMismatch,
    as_rational,
    poly_diff,
    poly_eval,
    poly_mul,
    poly_subst,
)

Index = Tuple[int, ...]


class GradingError(ValueError):
    """Forms of different degree were compared or combined."""


class UnsupportedMap(ValueError):
    pass


@lru_cache(maxsize=None)
def merge_indices(a: Index, b: Index) -> Tuple[int, Optional[Index]]:
    """Sign and sorted union of ``dx^a ^ dx^b``; sign 0 when indices repeat."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return 0, None
    inversions = sum(1 for x in a for y in b if x > y)
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


@lru_cache(maxsize=None)
def sort_index(raw: Tuple[int, ...]) -> Tuple[int, Optional[Index]]:
    """Sign of the sorting permutation of ``raw``; 0 on repeated entries."""
    if len(set(raw)) != len(raw):
        return 0, None
    inversions = sum(1 for i in range(len(raw)) for j in range(i + 1, len(raw)) if raw[i] > raw[j])
    return (-1 if inversions & 1 else 1), tuple(sorted(raw))


@lru_cache(maxsize=None)
def remove_at(index: Index, var: int) -> Tuple[int, Optional[Index]]:
    """``i_{d/dx^var} dx^index`` as (sign, remaining index)."""
    try:
        p = index.index(var)
    except ValueError:
        return 0, None
    return (-1 if p & 1 else 1), index[:p] + index[p + 1:]


def _acc(store: dict, key, poly: JetPoly):
    if poly.is_zero():
        return
    prev = store.get(key)
    store[key] = poly if prev is None else prev + poly


def _coerce_poly(split: PatchSplit, c) -> JetPoly:
    if isinstance(c, JetPoly):
        if c.split != split:
            raise SplitMismatch("coefficient lives on a different patch")
        return c
    return JetPoly.const(split, c)


def _resolve_index(split: PatchSplit, names: Iterable) -> Tuple[int, ...]:
    return tuple(n if isinstance(n, int) else split.index(n) for n in names)


class ScalarForm:
    """Immutable scalar differential form of fixed degree."""

    __slots__ = ("split", "degree", "terms")

    def __init__(self, split: PatchSplit, degree: int, terms: Mapping = None):
        if degree < -1 or degree > split.dim:
            raise GradingError(f"degree {degree} impossible on a {split.dim}-dimensional patch")
        store: Dict[Index, JetPoly] = {}
        for raw, c in (terms or {}).items():
            raw = _resolve_index(split, raw)
            if len(raw) != degree:
                raise GradingError(f"index {raw} does not have length {degree}")
            sign, idx = sort_index(raw)
            if sign == 0:
                continue
            poly = _coerce_poly(split, c)
            _acc(store, idx, poly if sign > 0 else -poly)
        self._set(split, degree, store)

    def _set(self, split, degree, store):
        self.split = split
        self.degree = degree
        self.terms = {k: store[k] for k in sorted(store) if not store[k].is_zero()}

    @classmethod
    def _raw(cls, split, degree, store) -> "ScalarForm":
        obj = cls.__new__(cls)
        obj._set(split, degree, store)
        return obj

    @classmethod
    def zero(cls, split: PatchSplit, degree: int) -> "ScalarForm":
        return cls._raw(split, degree, {})

    @classmethod
    def function(cls, f: JetPoly) -> "ScalarForm":
        return cls._raw(f.split, 0, {(): f} if f else {})

    @classmethod
    def from_terms(cls, split: PatchSplit, degree: int, items: Iterable[Tuple[Sequence, object]]) -> "ScalarForm":
        store: Dict[Index, JetPoly] = {}
        for names, c in items:
            raw = _resolve_index(split, names)
            if len(raw) != degree:
                raise GradingError(f"index {raw} does not have length {degree}")
            sign, idx = sort_index(raw)
            if sign:
                poly = _coerce_poly(split, c)
                _acc(store, idx, poly if sign > 0 else -poly)
        return cls._raw(split, degree, store)

    @classmethod
    def dx(cls, split: PatchSplit, *names) -> "ScalarForm":
        return cls.from_terms(split, len(names), [(names, 1)])

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "ScalarForm"):
        if not isinstance(other, ScalarForm):
            raise TypeError("expected a ScalarForm")
        if self.split != other.split:
            raise SplitMismatch("forms live on different patches")
        if self.degree != other.degree:
            raise GradingError(f"cannot combine degree {self.degree} with degree {other.degree}")

    def __eq__(self, other):
        if not isinstance(other, ScalarForm):
            return NotImplemented
        self._check(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash((self.split, self.degree, tuple(self.terms.items())))

    def __add__(self, other):
        self._check(other)
        store = dict(self.terms)
        for k, c in other.terms.items():
            _acc(store, k, c)
        return ScalarForm._raw(self.split, self.degree, store)

    def __neg__(self):
        return ScalarForm._raw(self.split, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ScalarForm":
        if isinstance(c, JetPoly):
            return ScalarForm._raw(self.split, self.degree, {k: poly_mul(c, v) for k, v in self.terms.items()})
        c = as_rational(c)
        return ScalarForm._raw(self.split, self.degree, {k: v.scale(c) for k, v in self.terms.items()} if c else {})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __repr__(self):
        return f"ScalarForm(deg={self.degree}: {self.to_text()})"

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self.split.variables
        return " ; ".join(
            f"[{' '.join(names[i] for i in idx)}] ({c.to_text()})" for idx, c in self.terms.items()
        )


class VectorForm:
    """Immutable tangent-valued form ``sum c dx^I (x) d/dx^j`` of fixed degree."""

    __slots__ = ("split", "degree", "terms", "_components")

    def __init__(self, split: PatchSplit, degree: int, terms: Mapping = None):
        if degree < 0 or degree > split.dim:
            raise GradingError(f"degree {degree} impossible on a {split.dim}-dimensional patch")
        store: Dict[Tuple[Index, int], JetPoly] = {}
        for (raw, j), c in (terms or {}).items():
            raw = _resolve_index(split, raw)
            j = j if isinstance(j, int) else split.index(j)
            if len(raw) != degree:
                raise GradingError(f"index {raw} does not have length {degree}")
            sign, idx = sort_index(raw)
            if sign:
                poly = _coerce_poly(split, c)
                _acc(store, (idx, j), poly if sign > 0 else -poly)
        self._set(split, degree, store)

    def _set(self, split, degree, store):
        self.split = split
        self.degree = degree
        self.terms = {k: store[k] for k in sorted(store) if not store[k].is_zero()}
        self._components = None

    @classmethod
    def _raw(cls, split, degree, store) -> "VectorForm":
        obj = cls.__new__(cls)
        obj._set(split, degree, store)
        return obj

    @classmethod
    def zero(cls, split: PatchSplit, degree: int) -> "VectorForm":
        return cls._raw(split, degree, {})

    @classmethod
    def from_terms(cls, split: PatchSplit, degree: int, items: Iterable[Tuple[Sequence, object, object]]) -> "VectorForm":
        return cls(split, degree, _sum_items(items))

    @classmethod
    def vector_field(cls, split: PatchSplit, components: Mapping) -> "VectorForm":
        return cls(split, 0, {((), j): c for j, c in components.items()})

    @classmethod
    def from_components(cls, split: PatchSplit, degree: int, comps: Mapping[int, ScalarForm]) -> "VectorForm":
        store = {}
        for j, form in comps.items():
            if form.degree != degree:
                raise GradingError("component degree mismatch")
            for idx, c in form.terms.items():
                store[(idx, j)] = c
        return cls._raw(split, degree, store)

    def component(self, j: int) -> ScalarForm:
        """The scalar form ``dx^j``-coefficient, i.e. ``L_K(x^j)``."""
        if self._components is None:
            comps: Dict[int, Dict[Index, JetPoly]] = {}
            for (idx, jj), c in self.terms.items():
                comps.setdefault(jj, {})[idx] = c
            self._components = {jj: ScalarForm._raw(self.split, self.degree, d) for jj, d in comps.items()}
        return self._components.get(j) or ScalarForm.zero(self.split, self.degree)

    def directions(self) -> List[int]:
        return sorted({j for _, j in self.terms})

    def is_zero(self) -> bool:
        return not self.terms

    def max_coeff_degree(self) -> int:
        return max((c.degree() for c in self.terms.values()), default=0)

    def fiber_dependent(self) -> bool:
        return any(c.fiber_degree() > 0 for c in self.terms.values())

    def _check(self, other):
        if not isinstance(other, VectorForm):
            raise TypeError("expected a VectorForm")
        if self.split != other.split:
            raise SplitMismatch("forms live on different patches")
        if self.degree != other.degree:
            raise GradingError(f"cannot combine degree {self.degree} with degree {other.degree}")

    def __eq__(self, other):
        if not isinstance(other, VectorForm):
            return NotImplemented
        self._check(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash((self.split, self.degree, tuple(self.terms.items())))

    def __add__(self, other):
        self._check(other)
        store = dict(self.terms)
        for k, c in other.terms.items():
            _acc(store, k, c)
        return VectorForm._raw(self.split, self.degree, store)

    def __neg__(self):
        return VectorForm._raw(self.split, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "VectorForm":
        if isinstance(c, JetPoly):
            return VectorForm._raw(self.split, self.degree, {k: poly_mul(c, v) for k, v in self.terms.items()})
        c = as_rational(c)
        return VectorForm._raw(self.split, self.degree, {k: v.scale(c) for k, v in self.terms.items()} if c else {})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"VectorForm(deg={self.degree}: {self.to_text()})"

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self.split.variables
        return " ; ".join(
            f"[{' '.join(names[i] for i in idx)}]->{names[j]} ({c.to_text()})"
            for (idx, j), c in self.terms.items()
        )


def _sum_items(items):
    out = {}
    for names, j, c in items:
        key = (tuple(names), j)
        out[key] = out[key] + c if key in out else c
    return out


# exterior calculus ---------------------------------------------------------

def wedge(a: ScalarForm, b: ScalarForm) -> ScalarForm:
    if a.split != b.split:
        raise SplitMismatch("forms live on different patches")
    degree = a.degree + b.degree
    if degree > a.split.dim:
        return _zero_over(a.split, degree)
    store: Dict[Index, JetPoly] = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            sign, idx = merge_indices(ia, ib)
            if sign:
                p = poly_mul(ca, cb)
                _acc(store, idx, p if sign > 0 else -p)
    return ScalarForm._raw(a.split, degree, store)


class _OverDegreeZero(ScalarForm):
    """Zero form whose degree exceeds the patch dimension (always empty)."""

    __slots__ = ()


def _zero_over(split, degree):
    obj = _OverDegreeZero.__new__(_OverDegreeZero)
    obj.split, obj.degree, obj.terms = split, degree, {}
    return obj


def ext_d(a: ScalarForm) -> ScalarForm:
    split = a.split
    degree = a.degree + 1
    if degree > split.dim:
        return _zero_over(split, degree)
    store: Dict[Index, JetPoly] = {}
    for idx, c in a.terms.items():
        live = {i for m in c.terms for i, e in enumerate(m) if e}
        for v in sorted(live):
            if v in idx:
                continue
            dc = poly_diff(c, v)
            if dc.is_zero():
                continue
            sign, new = merge_indices((v,), idx)
            _acc(store, new, dc if sign > 0 else -dc)
    return ScalarForm._raw(split, degree, store)


def contract(vector_index: int, b: ScalarForm) -> ScalarForm:
    """Insertion of the coordinate field ``d/dx^vector_index``."""
    store: Dict[Index, JetPoly] = {}
    for idx, c in b.terms.items():
        sign, rest = remove_at(idx, vector_index)
        if sign:
            _acc(store, rest, c if sign > 0 else -c)
    return ScalarForm._raw(b.split, b.degree - 1, store)


def insert_K(K: VectorForm, b: ScalarForm) -> ScalarForm:
    """``i_K b``; on decomposables ``i_{alpha (x) X} b = alpha ^ i_X b``."""
    if K.split != b.split:
        raise SplitMismatch("forms live on different patches")
    degree = K.degree + b.degree - 1
    if b.degree == 0 or degree < 0:
        return ScalarForm.zero(b.split, max(degree, -1)) if degree <= b.split.dim else _zero_over(b.split, degree)
    if degree > b.split.dim:
        return _zero_over(b.split, degree)
    store: Dict[Index, JetPoly] = {}
    by_dir: Dict[int, List[Tuple[Index, JetPoly]]] = {}
    for (ia, j), ck in K.terms.items():
        by_dir.setdefault(j, []).append((ia, ck))
    for idx, cb in b.terms.items():
        for p, var in enumerate(idx):
            entries = by_dir.get(var)
            if not entries:
                continue
            rest = idx[:p] + idx[p + 1:]
            s1 = -1 if p & 1 else 1
            for ia, ck in entries:
                s2, new = merge_indices(ia, rest)
                if s2:
                    prod = poly_mul(ck, cb)
                    _acc(store, new, prod if s1 * s2 > 0 else -prod)
    return ScalarForm._raw(b.split, degree, store)


def lie_deriv(K: VectorForm, b: ScalarForm) -> ScalarForm:
    """``L_K b = i_K d b - (-1)^(k-1) d i_K b``."""
    if K.split != b.split:
        raise SplitMismatch("forms live on different patches")
    degree = K.degree + b.degree
    if degree > b.split.dim:
        return _zero_over(b.split, degree)
    first = insert_K(K, ext_d(b))
    if b.degree == 0:
        return first
    second = ext_d(insert_K(K, b))
    if (K.degree - 1) % 2 == 0:
        return first - second
    return first + second


def fn_bracket(K: VectorForm, L: VectorForm) -> VectorForm:
    """Frolicher-Nijenhuis bracket via ``[K,L]^j = L_K(L^j) - (-1)^{kl} L_L(K^j)``."""
    if K.split != L.split:
        raise SplitMismatch("forms live on different patches")
    split = K.split
    degree = K.degree + L.degree
    if degree > split.dim:
        raise GradingError(f"bracket degree {degree} exceeds patch dimension {split.dim}")
    odd = (K.degree * L.degree) % 2 == 1
    store = {}
    # components vanish outside the directions carried by K or L
    for j in sorted(set(K.directions()) | set(L.directions())):
        Lj = L.component(j)
        Kj = K.component(j)
        comp = lie_deriv(K, Lj) if not Lj.is_zero() else None
        other = lie_deriv(L, Kj) if not Kj.is_zero() else None
        if other is not None:
            other = other if odd else -other
            comp = other if comp is None else comp + other
        if comp is not None:
            for idx, c in comp.terms.items():
                store[(idx, j)] = c
    return VectorForm._raw(split, degree, store)


def graded_commutator_on(K: VectorForm, L: VectorForm, b: ScalarForm) -> ScalarForm:
    """``(L_K L_L - (-1)^{kl} L_L L_K) b`` evaluated directly."""
    first = lie_deriv(K, lie_deriv(L, b))
    second = lie_deriv(L, lie_deriv(K, b))
    return first - second if (K.degree * L.degree) % 2 == 0 else first + second


# metrics and hat -------------------------------------------------------------

@dataclass(frozen=True)
class ConstMetric:
    """Constant symmetric non-degenerate bilinear form with cached exact inverse."""

    entries: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_rational(c) for c in row) for row in self.entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise AlgebraError("metric must be square")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
            raise AlgebraError("metric must be symmetric")
        try:
            inv = linalg.inverse([list(r) for r in rows])
        except ZeroDivisionError:
            raise AlgebraError("metric is degenerate") from None
        ident = [[sum(rows[i][k] * inv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        if ident != [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]:
            raise AlgebraError("metric inverse check failed")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "_inverse", tuple(tuple(r) for r in inv))

    @classmethod
    def euclidean(cls, n: int) -> "ConstMetric":
        return cls.diag([1] * n)

    @classmethod
    def diag(cls, values: Sequence) -> "ConstMetric":
        n = len(values)
        return cls(tuple(tuple(values[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return self._inverse

    def inner(self, u: Sequence, v: Sequence) -> Fraction:
        g = self.entries
        return sum((g[i][j] * u[i] * v[j] for i in range(len(u)) for j in range(len(v)) if g[i][j]), Fraction(0))


def hat(phi: ScalarForm, g: ConstMetric) -> VectorForm:
    """Metric contraction ``sum_{i,j} g^{ij} (i_{d_i} phi) (x) d_j``."""
    split = phi.split
    if g.dim != split.dim:
        raise AlgebraError(f"metric dimension {g.dim} does not match patch dimension {split.dim}")
    if phi.degree == 0:
        raise GradingError("hat needs a form of degree >= 1")
    ginv = g.inverse
    store = {}
    for i in range(split.dim):
        part = contract(i, phi)
        if part.is_zero():
            continue
        for j in range(split.dim):
            if ginv[i][j]:
                for idx, c in part.terms.items():
                    _acc(store, (idx, j), c.scale(ginv[i][j]))
    return VectorForm._raw(split, phi.degree - 1, store)


# maps and pullback -----------------------------------------------------------

class PatchMap:
    """Invertible patch map: a linear map or a vertical shear ``y -> y + h(x)``."""

    def __init__(self, split: PatchSplit, kind: str, images, jac_inv, data):
        self.split = split
        self.kind = kind
        self.images: Tuple[JetPoly, ...] = tuple(images)
        self.jac_inv = tuple(tuple(r) for r in jac_inv)
        self.data = data

    @classmethod
    def identity(cls, split: PatchSplit) -> "PatchMap":
        n = split.dim
        return cls.linear(split, [[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def linear(cls, split: PatchSplit, matrix: Sequence[Sequence]) -> "PatchMap":
        n = split.dim
        A = [[as_rational(c) for c in row] for row in matrix]
        if len(A) != n or any(len(r) != n for r in A):
            raise UnsupportedMap(f"linear map must be {n}x{n}")
        try:
            Ainv = linalg.inverse(A)
        except ZeroDivisionError:
            raise UnsupportedMap("linear map is not invertible") from None
        xs = [JetPoly.var(split, v) for v in split.variables]
        images = []
        for a in range(n):
            img = JetPoly.zero(split)
            for b in range(n):
                if A[a][b]:
                    img = img + xs[b].scale(A[a][b])
            images.append(img)
        jinv = [[JetPoly.const(split, Ainv[i][j]) for j in range(n)] for i in range(n)]
        return cls(split, "linear", images, jinv, tuple(tuple(r) for r in A))

    @classmethod
    def shear(cls, split: PatchSplit, shift: Mapping[str, JetPoly]) -> "PatchMap":
        n, nb = split.dim, split.nbase
        h = {}
        for name, poly in shift.items():
            i = split.index(name)
            if not split.is_fiber(i):
                raise UnsupportedMap(f"shear may only move fiber variables, not {name}")
            poly = _coerce_poly(split, poly)
            if not poly.is_base_only():
                raise UnsupportedMap("shear offset must depend on base variables only")
            h[i] = poly
        images = [JetPoly.var(split, v) + h.get(a, 0) if a in h else JetPoly.var(split, v)
                  for a, v in enumerate(split.variables)]
        zero = JetPoly.zero(split)
        one = JetPoly.const(split, 1)
        jinv = [[one if i == j else zero for j in range(n)] for i in range(n)]
        for r, hr in h.items():
            for i in range(nb):
                jinv[r][i] = -poly_diff(hr, i)
        data = tuple(sorted((split.variables[i], p) for i, p in h.items()))
        return cls(split, "shear", images, jinv, data)

    def inverse(self) -> "PatchMap":
        if self.kind == "linear":
            return PatchMap.linear(self.split, linalg.inverse([list(r) for r in self.data]))
        return PatchMap.shear(self.split, {name: -p for name, p in self.data})

    def apply(self, pt: Point) -> Point:
        return Point(self.split, tuple(poly_eval(img, pt) for img in self.images))

    def __repr__(self):
        return f"PatchMap({self.kind})"


def _pullback_differentials(f: PatchMap):
    cache: Dict[Index, ScalarForm] = {(): ScalarForm.function(JetPoly.const(f.split, 1))}
    dF = [ext_d(ScalarForm.function(img)) for img in f.images]

    def dF_index(idx: Index) -> ScalarForm:
        if idx not in cache:
            cache[idx] = wedge(dF_index(idx[:-1]), dF[idx[-1]])
        return cache[idx]

    return dF_index


def _subst_map(f: PatchMap):
    return {v: img for v, img in zip(f.split.variables, f.images)}


def pullback_scalar(f: PatchMap, b: ScalarForm) -> ScalarForm:
    if f.split != b.split:
        raise SplitMismatch("map and form live on different patches")
    dF_index = _pullback_differentials(f)
    mapping = _subst_map(f)
    out = ScalarForm.zero(b.split, b.degree)
    for idx, c in b.terms.items():
        out = out + dF_index(idx).scale(poly_subst(c, mapping))
    return out


def pullback(f: PatchMap, K):
    """``(f^*K)_x(X..) = (T_x f)^{-1} K_{f(x)}(T_x f X, ..)``; scalar forms pull back as usual."""
    if isinstance(K, ScalarForm):
        return pullback_scalar(f, K)
    if f.kind not in ("linear", "shear"):
        raise UnsupportedMap(f"unsupported map class {f.kind!r}")
    if f.split != K.split:
        raise SplitMismatch("map and form live on different patches")
    dF_index = _pullback_differentials(f)
    mapping = _subst_map(f)
    n = K.split.dim
    store = {}
    for (idx, j), c in K.terms.items():
        base = dF_index(idx).scale(poly_subst(c, mapping))
        if base.is_zero():
            continue
        for i in range(n):
            coeff = f.jac_inv[i][j]
            if coeff.is_zero():
                continue
            for bidx, bc in base.terms.items():
                _acc(store, (bidx, i), poly_mul(coeff, bc))
    return VectorForm._raw(K.split, K.degree, store)


# pointwise evaluation -----------------------------------------------------------

def small_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            result = -result
        pv = m[col][col]
        result *= pv
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] / pv
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return result


def _check_vectors(split, vectors, k):
    if len(vectors) != k:
        raise GradingError(f"form of degree {k} needs {k} vectors, got {len(vectors)}")
    vecs = [[as_rational(c) for c in v] for v in vectors]
    if any(len(v) != split.dim for v in vecs):
        raise GradingError(f"vectors must have {split.dim} components")
    return vecs


def form_value(phi: ScalarForm, p: Point, vectors: Sequence[Sequence]) -> Fraction:
    vecs = _check_vectors(phi.split, vectors, phi.degree)
    total = Fraction(0)
    for idx, c in phi.terms.items():
        cv = poly_eval(c, p)
        if cv:
            total += cv * small_det([[v[i] for i in idx] for v in vecs])
    return total


def eval_on_vectors(K: VectorForm, p: Point, vectors: Sequence[Sequence]) -> List[Fraction]:
    """Value of ``K_p(v1, .., vk)`` as a coordinate vector."""
    vecs = _check_vectors(K.split, vectors, K.degree)
    out = [Fraction(0)] * K.split.dim
    dets: Dict[Index, Fraction] = {}
    for (idx, j), c in K.terms.items():
        if idx not in dets:
            dets[idx] = small_det([[v[i] for i in idx] for v in vecs])
        if dets[idx]:
            out[j] += poly_eval(c, p) * dets[idx]
    return out


def _component(phi: ScalarForm, raw: Tuple[int, ...]) -> Optional[JetPoly]:
    sign, idx = sort_index(raw)
    if not sign or idx not in phi.terms:
        return None
    c = phi.terms[idx]
    return c if sign > 0 else -c


def tau_from_phi(phi: ScalarForm) -> VectorForm:
    """``tau(x,y,z,w) = -(phi(y,z,w)x + phi(z,x,w)y + phi(x,y,w)z + phi(y,x,z)w)``.

    Built by evaluating the defining expression on coordinate 4-tuples.
    """
    if phi.degree != 3:
        raise GradingError("tau needs a 3-form")
    split = phi.split
    store = {}
    for a, b, c, d in combinations(range(split.dim), 4):
        slots = ((a, (b, c, d)), (b, (c, a, d)), (c, (a, b, d)), (d, (b, a, c)))
        for j, args in slots:
            val = _component(phi, args)
            if val is not None:
                _acc(store, ((a, b, c, d), j), -val)
    return VectorForm._raw(split, 4, store)
