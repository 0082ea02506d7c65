"""V-data of a submanifold modeled as the zero section of a split patch.

On a patch ``(x | y)`` with ``L = {y = 0}`` the abelian algebra is the space
of normal-valued forms on ``L``; ``iota_L`` reads such a form as a vertical
tangent-valued form and ``P_L`` restricts to the zero section and keeps the
fiber directions.  The multibrackets are the derived brackets

    ell_n(a1..an) = (-1)^star P[..[[Delta, iota a1], iota a2], .., iota an]

with ``star = sum_i (n - i)|a_i| + n(n+1)/2``.  Two readings of ``|a|`` are
supported; see :data:`CONVENTIONS`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .algebra import AlgebraError, JetPoly, PatchSplit, Point, as_rational, base_monomial, monomials_up_to, poly_eval, poly_mul
from .forms import GradingError, VectorForm, _acc, _coerce_poly, _resolve_index, fn_bracket, sort_index

#: ``shifted``: ``|a|`` is the form degree minus one; ``unshifted``: the form degree.
CONVENTIONS = ("shifted", "unshifted")
# Only this reading satisfies the arity-3 Jacobi identity on data with
# nonvanishing ell_2 o ell_2 (see select_convention and the twisted-J fixture).
DEFAULT_CONVENTION = "unshifted"


class VDataError(AlgebraError):
    pass


class InsufficientJetOrder(VDataError):
    pass


class DegreeOverflow(VDataError):
    """A form falls outside the truncated codomain used for exact solving."""


class NormalValuedForm:
    """Form on ``L`` with values in the normal bundle: ``sum c dx^I (x) d/dy^r``."""

    __slots__ = ("split", "degree", "terms")

    def __init__(self, split: PatchSplit, degree: int, terms: Mapping = None):
        if degree < 0 or degree > split.nbase:
            raise GradingError(f"degree {degree} impossible on a {split.nbase}-dimensional base")
        store = {}
        for (raw, r), c in (terms or {}).items():
            raw = _resolve_index(split, raw)
            r = r if isinstance(r, int) else split.index(r)
            if len(raw) != degree:
                raise GradingError(f"index {raw} does not have length {degree}")
            if any(split.is_fiber(i) for i in raw):
                raise VDataError("normal-valued forms only carry base differentials")
            if not split.is_fiber(r):
                raise VDataError("normal-valued forms only take fiber directions")
            poly = _coerce_poly(split, c)
            if not poly.is_base_only():
                raise VDataError("normal-valued coefficients must not depend on fiber variables")
            sign, idx = sort_index(raw)
            if sign:
                _acc(store, (idx, r), poly if sign > 0 else -poly)
        self._set(split, degree, store)

    def _set(self, split, degree, store):
        self.split = split
        self.degree = degree
        self.terms = {k: store[k] for k in sorted(store) if not store[k].is_zero()}

    @classmethod
    def _raw(cls, split, degree, store) -> "NormalValuedForm":
        obj = cls.__new__(cls)
        obj._set(split, degree, store)
        return obj

    @classmethod
    def zero(cls, split: PatchSplit, degree: int = 0) -> "NormalValuedForm":
        return cls._raw(split, degree, {})

    @classmethod
    def section(cls, split: PatchSplit, components: Mapping) -> "NormalValuedForm":
        return cls(split, 0, {((), r): c for r, c in components.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def max_coeff_degree(self) -> int:
        return max((c.degree() for c in self.terms.values()), default=0)

    def _check(self, other):
        if not isinstance(other, NormalValuedForm):
            raise TypeError("expected a NormalValuedForm")
        if self.split != other.split:
            raise AlgebraError("forms live on different patches")
        if self.degree != other.degree:
            raise GradingError(f"cannot combine degree {self.degree} with degree {other.degree}")

    def __eq__(self, other):
        if not isinstance(other, NormalValuedForm):
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
        return NormalValuedForm._raw(self.split, self.degree, store)

    def __neg__(self):
        return NormalValuedForm._raw(self.split, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "NormalValuedForm":
        c = as_rational(c)
        return NormalValuedForm._raw(self.split, self.degree, {k: v.scale(c) for k, v in self.terms.items()} if c else {})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def multiply(self, f: JetPoly) -> "NormalValuedForm":
        return NormalValuedForm._raw(self.split, self.degree, {k: poly_mul(f, v) for k, v in self.terms.items()})

    def __repr__(self):
        return f"NormalValuedForm(deg={self.degree}: {self.to_text()})"

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self.split.variables
        return " ; ".join(
            f"[{' '.join(names[i] for i in idx)}]->{names[r]} ({c.to_text()})"
            for (idx, r), c in self.terms.items()
        )


def iota_L(a: NormalValuedForm) -> VectorForm:
    """Vertical lift; coefficients and indices are kept as they are."""
    return VectorForm._raw(a.split, a.degree, dict(a.terms))


def P_L(W: VectorForm) -> NormalValuedForm:
    """Restrict to the zero section and keep the fiber directions."""
    split = W.split
    if W.degree > split.nbase:
        return _empty_over(split, W.degree)
    store = {}
    for (idx, j), c in W.terms.items():
        if not split.is_fiber(j) or any(split.is_fiber(i) for i in idx):
            continue
        _acc(store, (idx, j), c.restrict_to_base())
    return NormalValuedForm._raw(split, W.degree, store)


def _empty_over(split, degree):
    # forms of degree above dim L restrict to zero on L
    obj = NormalValuedForm.__new__(NormalValuedForm)
    obj.split, obj.degree, obj.terms = split, degree, {}
    return obj


@dataclass
class VData:
    """Split patch plus an odd tangent-valued form ``delta``."""

    delta: VectorForm
    validated: Dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if self.delta.degree % 2 == 0:
            raise GradingError(f"V-data needs an odd-degree form, got degree {self.delta.degree}")

    @property
    def split(self) -> PatchSplit:
        return self.delta.split


# random elements (used by validation and tests) ------------------------------

def random_base_poly(rng: random.Random, split: PatchSplit, max_degree: int = 2, density: float = 0.5,
                     coeff_range: int = 3) -> JetPoly:
    terms = {}
    for mono in monomials_up_to(split.nbase, max_degree):
        if rng.random() < density:
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                terms[base_monomial(split, mono)] = Fraction(c, rng.choice((1, 1, 2, 3)))
    return JetPoly(split, terms)


def random_normal_form(rng: random.Random, split: PatchSplit, degree: int, max_degree: int = 2,
                       density: float = 0.5) -> NormalValuedForm:
    """Random nonzero normal-valued form (zero only when the space is)."""
    nb = split.nbase
    keys = [(idx, r) for idx in combinations(range(nb), degree) for r in range(nb, split.dim)]
    store = {}
    while keys and not store:
        for key in keys:
            if rng.random() < density:
                poly = random_base_poly(rng, split, max_degree)
                if poly:
                    store[key] = poly
    return NormalValuedForm._raw(split, degree, store)


def random_vector_form(rng: random.Random, split: PatchSplit, degree: int, max_degree: int = 1,
                       density: float = 0.3, coeff_range: int = 2) -> VectorForm:
    store = {}
    for idx in combinations(range(split.dim), degree):
        for j in range(split.dim):
            if rng.random() < density:
                terms = {}
                for mono in monomials_up_to(split.dim, max_degree):
                    if rng.random() < density:
                        c = rng.randint(-coeff_range, coeff_range)
                        if c:
                            terms[mono] = Fraction(c)
                poly = JetPoly(split, terms)
                if poly:
                    store[(idx, j)] = poly
    return VectorForm._raw(split, degree, store)


def kernel_P_element(W: VectorForm) -> VectorForm:
    """``W - iota_L(P_L W)``, which always lies in ``ker P_L``."""
    if W.degree > W.split.nbase:
        return W
    return W - iota_L(P_L(W))


# validation -------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AxiomReport:
    results: Tuple[AxiomResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


AXIOMS = ("P-iota-identity", "abelian-image", "kerP-closed", "square-zero", "P-delta-zero")


def vdata_validate(V: VData, samples: int = 5, seed: int = 0) -> AxiomReport:
    """Check the five V-data axioms exactly; failures are reported, not raised."""
    split = V.split
    rng = random.Random(seed)
    nb = split.nbase
    results = []

    bad = None
    for _ in range(samples):
        deg = rng.randint(0, min(1, nb))
        a = random_normal_form(rng, split, deg)
        if P_L(iota_L(a)) != a:
            bad = a
            break
    results.append(AxiomResult(AXIOMS[0], bad is None, "" if bad is None else f"fails on {bad.to_text()}"))

    bad = None
    for _ in range(samples):
        a = random_normal_form(rng, split, rng.randint(0, min(1, nb)))
        b = random_normal_form(rng, split, rng.randint(0, min(1, nb)))
        if a.degree + b.degree > split.dim:
            continue
        br = fn_bracket(iota_L(a), iota_L(b))
        if not br.is_zero():
            bad = br
            break
    results.append(AxiomResult(AXIOMS[1], bad is None, "" if bad is None else f"bracket {bad.to_text()}"))

    bad = None
    for _ in range(samples):
        w1 = kernel_P_element(random_vector_form(rng, split, rng.randint(0, 1)))
        w2 = kernel_P_element(random_vector_form(rng, split, rng.randint(0, 1)))
        pw = P_L(fn_bracket(w1, w2))
        if not pw.is_zero():
            bad = pw
            break
    results.append(AxiomResult(AXIOMS[2], bad is None, "" if bad is None else f"P of bracket {bad.to_text()}"))

    if 2 * V.delta.degree > split.dim:
        sq = None
    else:
        sq = fn_bracket(V.delta, V.delta)
    ok = sq is None or sq.is_zero()
    results.append(AxiomResult(AXIOMS[3], ok, "" if ok else f"[delta,delta] = {sq.to_text()}"))

    pd = P_L(V.delta)
    results.append(AxiomResult(AXIOMS[4], pd.is_zero(), "" if pd.is_zero() else f"P(delta) = {pd.to_text()}"))
    report = AxiomReport(tuple(results))
    V.validated = {r.name: r.passed for r in report.results}
    return report


# multibrackets ------------------------------------------------------------------

def bracket_degree(a: NormalValuedForm, convention: str) -> int:
    if convention == "shifted":
        return a.degree - 1
    if convention == "unshifted":
        return a.degree
    raise ValueError(f"unknown sign convention {convention!r}")


def star_exponent(degrees: Sequence[int], convention: str = DEFAULT_CONVENTION) -> int:
    """``sum_i (n-i)|a_i| + n(n+1)/2`` from the form degrees of the arguments."""
    n = len(degrees)
    shift = -1 if convention == "shifted" else 0
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown sign convention {convention!r}")
    return sum((n - i) * (d + shift) for i, d in enumerate(degrees, start=1)) + n * (n + 1) // 2


def _check_jet(V: VData, n: int):
    T = V.split.jet_order
    if n > T and V.delta.fiber_dependent():
        raise InsufficientJetOrder(f"{n} brackets need fiber jets of order {n}, patch keeps {T}")


def nested_bracket(V: VData, args: Sequence[NormalValuedForm]) -> VectorForm:
    W = V.delta
    for a in args:
        if W.degree + a.degree > V.split.dim:
            return None
        W = fn_bracket(W, iota_L(a))
    return W


def derived_bracket(V: VData, args: Sequence[NormalValuedForm]) -> NormalValuedForm:
    """Unsigned ``P[..[Delta, iota a1]..,iota an]``."""
    _check_jet(V, len(args))
    degree = V.delta.degree + sum(a.degree for a in args)
    W = nested_bracket(V, args)
    if W is None:
        return _empty_over(V.split, degree)
    return P_L(W)


def ell_n(V: VData, *args: NormalValuedForm, convention: str = DEFAULT_CONVENTION) -> NormalValuedForm:
    if not args:
        raise ValueError("ell_n needs at least one argument")
    out = derived_bracket(V, args)
    if star_exponent([a.degree for a in args], convention) % 2:
        return -out
    return out


def diagonal_sign(k: int, convention: str = DEFAULT_CONVENTION) -> int:
    """Predicted ``c`` in ``P(L_X^k Delta) = c ell_k(xi..xi)`` for a section ``xi``, ``X = iota xi``.

    ``L_X W = [X, W] = -[W, X]`` for ``X`` of degree 0, so the nested bracket
    picks up ``(-1)^k`` on top of the star sign.
    """
    return -1 if (k + star_exponent([0] * k, convention)) % 2 else 1


# L-infinity identities ------------------------------------------------------------

def _unshuffles(n: int, i: int):
    for first in combinations(range(n), i):
        rest = tuple(x for x in range(n) if x not in first)
        yield first + rest


def _koszul(perm: Sequence[int], parities: Sequence[int]) -> int:
    """Koszul sign of reordering elements ``0..n-1`` into ``perm`` given parities."""
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and parities[perm[a]] and parities[perm[b]]:
                sign = -sign
    return sign


def _perm_sign(perm: Sequence[int]) -> int:
    inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return -1 if inv % 2 else 1


def _sum_into(acc, term):
    if term is None or term.is_zero():
        return acc
    return term if acc is None else acc + term


def jacobi_antisymmetric(V: VData, args: Sequence[NormalValuedForm],
                         convention: str = DEFAULT_CONVENTION) -> Optional[NormalValuedForm]:
    """Generalized Jacobi sum for the antisymmetric brackets ``ell``.

    ``sum_{i+j=n+1} sum_sigma chi(sigma) (-1)^{i(j-1)} ell_j(ell_i(a_s1..a_si), a_s(i+1)..)``
    with ``chi`` the antisymmetric Koszul sign for parities ``deg a + 1``.
    Returns the sum, or None when every term vanishes identically.
    """
    n = len(args)
    parities = [(a.degree + 1) % 2 for a in args]
    acc = None
    for i in range(1, n + 1):
        j = n + 1 - i
        for perm in _unshuffles(n, i):
            chi = _perm_sign(perm) * _koszul(perm, parities)
            sign = chi * (-1 if (i * (j - 1)) % 2 else 1)
            inner = ell_n(V, *[args[k] for k in perm[:i]], convention=convention)
            if inner.is_zero() or inner.degree > V.split.nbase:
                continue
            outer = ell_n(V, inner, *[args[k] for k in perm[i:]], convention=convention)
            acc = _sum_into(acc, outer if sign > 0 else -outer)
    return acc


def jacobi_symmetric(V: VData, args: Sequence[NormalValuedForm]) -> Optional[NormalValuedForm]:
    """Identity for the unsigned derived brackets: ``sum_sigma eps(sigma) Phi(Phi(..), ..) = 0``.

    ``eps`` is the Koszul sign for the parities of the form degrees.
    """
    n = len(args)
    parities = [a.degree % 2 for a in args]
    acc = None
    for i in range(1, n + 1):
        for perm in _unshuffles(n, i):
            eps = _koszul(perm, parities)
            inner = derived_bracket(V, [args[k] for k in perm[:i]])
            if inner.is_zero() or inner.degree > V.split.nbase:
                continue
            outer = derived_bracket(V, [inner] + [args[k] for k in perm[i:]])
            acc = _sum_into(acc, outer if eps > 0 else -outer)
    return acc


def select_convention(V: VData, samples: int = 10, seed: int = 0, arity: int = 3) -> Tuple[str, ...]:
    """Conventions whose Jacobi sums vanish on random sections and 1-forms."""
    rng = random.Random(seed)
    trials = [[random_normal_form(rng, V.split, rng.choice((0, 0, 1)) if V.split.nbase else 0)
               for _ in range(arity)] for _ in range(samples)]
    return tuple(c for c in CONVENTIONS
                 if all(is_zero_or_none(jacobi_antisymmetric(V, args, c)) for args in trials))


def is_zero_or_none(x) -> bool:
    return x is None or x.is_zero()


# linearized operator ------------------------------------------------------------

def normal_basis(split: PatchSplit, degree: int, max_base_degree: int) -> List[Tuple[Tuple[int, ...], int, Tuple[int, ...]]]:
    """Monomial basis ``x^mu dx^I (x) d/dy^r`` ordered by (mu, I, r)."""
    nb = split.nbase
    out = []
    for mono in monomials_up_to(nb, max_base_degree):
        for idx in combinations(range(nb), degree):
            for r in range(nb, split.dim):
                out.append((idx, r, base_monomial(split, mono)))
    return out


def basis_element(split: PatchSplit, degree: int, key) -> NormalValuedForm:
    idx, r, mono = key
    return NormalValuedForm._raw(split, degree, {(idx, r): JetPoly._raw(split, {mono: Fraction(1)})})


@dataclass
class LinearOperatorMatrix:
    """Exact matrix of ``ell_1`` between truncated monomial bases."""

    split: PatchSplit
    source_degree: int
    target_degree: int
    domain_basis: List
    codomain_basis: List
    entries: List[List[Fraction]]
    kernel: List[List[Fraction]]
    _row_of: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._row_of = {key: i for i, key in enumerate(self.codomain_basis)}
        self._col_of = {key: i for i, key in enumerate(self.domain_basis)}

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel)

    @property
    def rank(self) -> int:
        return len(self.domain_basis) - len(self.kernel)

    def codomain_coords(self, w: NormalValuedForm) -> List[Fraction]:
        if w.degree != self.target_degree:
            raise GradingError("form degree does not match the codomain")
        vec = [Fraction(0)] * len(self.codomain_basis)
        for (idx, r), c in w.terms.items():
            for mono, q in c.terms.items():
                row = self._row_of.get((idx, r, mono))
                if row is None:
                    raise DegreeOverflow(f"term of base degree {sum(mono)} lies outside the truncated codomain")
                vec[row] = q
        return vec

    def domain_coords(self, s: NormalValuedForm) -> List[Fraction]:
        vec = [Fraction(0)] * len(self.domain_basis)
        for (idx, r), c in s.terms.items():
            for mono, q in c.terms.items():
                col = self._col_of.get((idx, r, mono))
                if col is None:
                    raise DegreeOverflow(f"section term of base degree {sum(mono)} lies outside the domain")
                vec[col] = q
        return vec

    def element(self, coords: Sequence[Fraction]) -> NormalValuedForm:
        store = {}
        for key, q in zip(self.domain_basis, coords):
            if q:
                idx, r, mono = key
                _acc(store, (idx, r), JetPoly._raw(self.split, {mono: Fraction(q)}))
        return NormalValuedForm._raw(self.split, self.source_degree, store)

    def apply(self, coords: Sequence[Fraction]) -> List[Fraction]:
        return linalg.matvec(self.entries, coords)


def delta_coeff_degree(V: VData) -> int:
    return V.delta.max_coeff_degree()


def ell1_operator(V: VData, D: int, source_degree: int = 0, convention: str = DEFAULT_CONVENTION) -> LinearOperatorMatrix:
    if D < 0:
        raise ValueError("degree bound must be non-negative")
    split = V.split
    E = delta_coeff_degree(V)
    tdeg = V.delta.degree + source_degree
    domain = normal_basis(split, source_degree, D)
    codomain = normal_basis(split, tdeg, D + E) if tdeg <= split.nbase else []
    op = LinearOperatorMatrix(split, source_degree, tdeg, domain, codomain, [], [])
    cols = []
    for key in domain:
        image = ell_n(V, basis_element(split, source_degree, key), convention=convention)
        cols.append(op.codomain_coords(image) if codomain else [])
    rows = [[cols[c][r] for c in range(len(domain))] for r in range(len(codomain))]
    op.entries = rows
    op.kernel = linalg.nullspace(rows, len(domain)) if rows else [
        [Fraction(int(i == j)) for j in range(len(domain))] for i in range(len(domain))]
    return op


# principal symbol -------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolMap:
    """``sigma_xi`` as a matrix from ``N_p L`` to ``Lambda^d T*_p L (x) N_p L``."""

    rows: Tuple[Tuple[int, ...], ...]
    fiber_dirs: Tuple[int, ...]
    matrix: Tuple[Tuple[Fraction, ...], ...]

    @property
    def rank(self) -> int:
        return linalg.rank([list(r) for r in self.matrix], len(self.fiber_dirs)) if self.matrix else 0

    @property
    def injective(self) -> bool:
        return self.rank == len(self.fiber_dirs)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.matrix)


def _principal_parts(V: VData, p: Point, convention: str):
    split = V.split
    nb = split.nbase
    parts = []
    for i in range(nb):
        xi = JetPoly.var(split, split.base_vars[i]) - p.coords[i]
        cols = []
        for r in range(nb, split.dim):
            s = NormalValuedForm._raw(split, 0, {((), r): xi})
            cols.append(ell_n(V, s, convention=convention))
        parts.append(cols)
    return parts


def symbol_at(V: VData, p: Point, xi: Sequence, convention: str = DEFAULT_CONVENTION) -> SymbolMap:
    """Principal symbol of ``ell_1`` at ``p`` on the covector ``xi`` (base components)."""
    split = V.split
    if not p.on_zero_section():
        raise VDataError("symbol is only defined at points of L (fiber coordinates zero)")
    xi = [as_rational(c) for c in xi]
    if len(xi) != split.nbase:
        raise VDataError(f"covector needs {split.nbase} components")
    d = V.delta.degree
    rows = tuple(combinations(range(split.nbase), d))
    fibers = tuple(range(split.nbase, split.dim))
    row_keys = [(idx, r) for idx in rows for r in fibers]
    mat = [[Fraction(0)] * len(fibers) for _ in row_keys]
    if d <= split.nbase:
        parts = _principal_parts(V, p, convention)
        for i, coeff in enumerate(xi):
            if not coeff:
                continue
            for col, image in enumerate(parts[i]):
                for (idx, r), c in image.terms.items():
                    mat[row_keys.index((idx, r))][col] += coeff * poly_eval(c, p)
    return SymbolMap(tuple(row_keys), fibers, tuple(tuple(r) for r in mat))
