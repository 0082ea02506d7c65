"""Formal deformations of the zero section.

``f_psi`` expands ``P_L(exp(sigma L_X) Delta)`` for ``X = iota_L(s(eps))``,
where ``L_X W = [X, W]`` is the Frolicher-Nijenhuis Lie derivative.  The sign
``SIGMA`` is fixed by :func:`graph_defect`, an independent closed-form
evaluation of the normal part of ``Delta`` along the graph of ``s``.

The Maurer-Cartan series uses per-arity weights ``w_k`` chosen so that
``f_psi(s)`` and ``mc_residual(-s)`` agree term by term (:func:`mc_weight`).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .algebra import JetPoly, Point, as_rational, poly_diff, poly_eval, poly_subst
from .calibration import KVectorFrame, PlaneCheckReport, plane_condition
from .forms import ScalarForm, VectorForm, fn_bracket, wedge
from .vdata import (
    DEFAULT_CONVENTION,
    DegreeOverflow,
    InsufficientJetOrder,
    NormalValuedForm,
    VData,
    VDataError,
    P_L,
    _acc,
    diagonal_sign,
    ell1_operator,
    ell_n,
    iota_L,
)

#: exponent sign in ``exp(SIGMA * L_X)``; pinned by agreement with graph_defect
SIGMA = 1


class PreconditionError(VDataError):
    pass


@dataclass(frozen=True)
class FormalSection:
    """``s(eps) = sum_{i=1}^N eps^i s_i``; the constant term is zero."""

    coeffs: Tuple[NormalValuedForm, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        for c in self.coeffs:
            if c.degree != 0:
                raise PreconditionError("formal sections have degree-0 coefficients")

    @classmethod
    def linear(cls, s: NormalValuedForm, order: int) -> "FormalSection":
        """The family ``eps * s`` written to the given order."""
        zero = NormalValuedForm.zero(s.split, 0)
        return cls((s,) + (zero,) * (order - 1))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i: int) -> NormalValuedForm:
        """``s_i`` with ``s_0 = 0`` and zero beyond the stored order."""
        if 1 <= i <= len(self.coeffs):
            return self.coeffs[i - 1]
        return NormalValuedForm.zero(self.coeffs[0].split, 0) if self.coeffs else None

    def __neg__(self) -> "FormalSection":
        return FormalSection(tuple(-c for c in self.coeffs))

    def truncated(self, order: int) -> "FormalSection":
        split = self.coeffs[0].split
        pad = tuple(NormalValuedForm.zero(split, 0) for _ in range(max(0, order - len(self.coeffs))))
        return FormalSection((self.coeffs + pad)[:order])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)


@dataclass(frozen=True)
class FormalNormalForm:
    """Coefficients of ``eps^0 .. eps^N``."""

    coeffs: Tuple[NormalValuedForm, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> NormalValuedForm:
        return self.coeffs[k]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def first_nonzero(self) -> Optional[int]:
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        return None


def _check_order(V: VData, N: int):
    if N < 1:
        raise ValueError("order must be at least 1")
    if V.split.jet_order < N:
        raise InsufficientJetOrder(f"order {N} needs fiber jets of order {N}, patch keeps {V.split.jet_order}")


def _zero_target(V: VData) -> NormalValuedForm:
    return P_L(VectorForm.zero(V.split, V.delta.degree))


def f_psi(V: VData, s: FormalSection, N: int, sigma: int = SIGMA) -> FormalNormalForm:
    """``P_L(exp(sigma L_X) Delta)`` with ``X = iota_L(s(eps))``, through ``eps^N``."""
    _check_order(V, N)
    s = s.truncated(N)
    lifts = [None] + [iota_L(s[i]) for i in range(1, N + 1)]
    # layer[j][k]: eps^k part of L_X^j Delta
    layer: List[Dict[int, VectorForm]] = [{0: V.delta}]
    out = [P_L(V.delta)] + [_zero_target(V) for _ in range(N)]
    for j in range(1, N + 1):
        prev, cur = layer[-1], {}
        for k in range(j, N + 1):
            acc = None
            for i in range(1, k - j + 2):
                if s[i].is_zero() or (k - i) not in prev:
                    continue
                term = fn_bracket(lifts[i], prev[k - i])
                acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                cur[k] = acc
        layer.append(cur)
        weight = Fraction(sigma ** j, factorial(j))
        for k, W in cur.items():
            out[k] = out[k] + P_L(W).scale(weight)
    return FormalNormalForm(tuple(out))


def mc_weight(k: int, convention: str = DEFAULT_CONVENTION, sigma: int = SIGMA) -> Fraction:
    """``w_k = (-sigma)^k c_k / k!`` where ``P(L_X^k Delta) = c_k ell_k(xi..xi)``.

    With these weights ``mc_residual(-s)`` reproduces ``f_psi(s)`` exactly.
    """
    return Fraction((-sigma) ** k * diagonal_sign(k, convention), factorial(k))


def _compositions(k: int, parts: int, largest: int):
    """Multisets of ``parts`` positive integers summing to ``k`` with their ordering counts."""
    for combo in combinations_with_replacement(range(1, largest + 1), parts):
        if sum(combo) != k:
            continue
        count = factorial(parts)
        for v in set(combo):
            count //= factorial(combo.count(v))
        yield combo, count


def _mc_order(V: VData, s: FormalSection, k: int, convention: str, min_arity: int = 1,
              weights=None) -> NormalValuedForm:
    acc = _zero_target(V)
    for j in range(min_arity, k + 1):
        w = weights(j) if weights else mc_weight(j, convention)
        if not w:
            continue
        for combo, count in _compositions(k, j, k):
            args = [s[i] for i in combo]
            if any(a.is_zero() for a in args):
                continue
            acc = acc + ell_n(V, *args, convention=convention).scale(w * count)
    return acc


def mc_residual(V: VData, s: FormalSection, N: int, convention: str = DEFAULT_CONVENTION,
                weights=None) -> FormalNormalForm:
    """Order-by-order ``sum_k w_k ell_k(s(eps), .., s(eps))`` through ``eps^N``."""
    _check_order(V, N)
    s = s.truncated(N)
    out = [P_L(V.delta)] + [_mc_order(V, s, k, convention, weights=weights) for k in range(1, N + 1)]
    return FormalNormalForm(tuple(out))


@dataclass(frozen=True)
class ObstructionReport:
    solved_through: int
    obstruction: NormalValuedForm
    rank: int
    augmented_rank: int
    partial: FormalSection

    @property
    def order(self) -> int:
        return self.solved_through + 1


def mc_solve(V: VData, s1: NormalValuedForm, N: int, D: int, convention: str = DEFAULT_CONVENTION):
    """Extend ``s1`` to a formal solution through ``eps^N`` on sections of base degree ``<= D``.

    Returns a FormalSection, or an ObstructionReport when some order has no
    preimage under the truncated ``ell_1``.  Residual terms of base degree
    above ``D + kE`` raise DegreeOverflow: the verdict is then inconclusive.
    """
    _check_order(V, N)
    if s1.degree != 0:
        raise PreconditionError("s1 must be a section")
    if not ell_n(V, s1, convention=convention).is_zero():
        raise PreconditionError("ell_1(s1) is not zero; s1 is not an infinitesimal deformation")
    op = ell1_operator(V, D, convention=convention)
    E = V.delta.max_coeff_degree()
    w1 = mc_weight(1, convention)
    coeffs = [s1]
    for k in range(2, N + 1):
        current = FormalSection(tuple(coeffs) + (NormalValuedForm.zero(V.split, 0),))
        r = _mc_order(V, current, k, convention, min_arity=2)
        if r.is_zero():
            coeffs.append(NormalValuedForm.zero(V.split, 0))
            continue
        if r.max_coeff_degree() > D + k * E:
            raise DegreeOverflow(f"order-{k} residual has base degree {r.max_coeff_degree()} > {D + k * E}")
        try:
            rhs = op.codomain_coords(r.scale(-1 / w1))
        except DegreeOverflow:
            rhs = None
        x = linalg.solve(op.entries, rhs, len(op.domain_basis)) if rhs is not None else None
        if x is None:
            aug = linalg.rank([row + [b] for row, b in zip(op.entries, rhs)], len(op.domain_basis) + 1) \
                if rhs is not None else op.rank + 1
            return ObstructionReport(k - 1, r, op.rank, aug, FormalSection(tuple(coeffs)))
        x = linalg.min_norm_representative(x, op.kernel)
        coeffs.append(op.element(x))
    return FormalSection(tuple(coeffs))


# graph criterion --------------------------------------------------------------

def graph_defect(Psi: VectorForm, s: NormalValuedForm) -> NormalValuedForm:
    """Normal part of ``Psi`` along the graph of ``s``, in closed form.

    Each term ``f dx^I ^ dy^R (x) d/dy^r`` contributes ``f(x, s(x)) dx^I ^ ds^R (x) d/dy^r``;
    a tangential direction ``d/dx^i`` contributes ``-f(x, s(x)) d_i s^r`` in direction ``r``.
    """
    split = Psi.split
    nb = split.nbase
    comps = {r: s.terms.get(((), r), JetPoly.zero(split)) for r in range(nb, split.dim)}
    graph = {split.variables[r]: c for r, c in comps.items()}
    ds = {}
    for r, c in comps.items():
        ds[r] = ScalarForm._raw(split, 1, {(i,): poly_diff(c, i) for i in range(nb) if poly_diff(c, i)})
    store = {}
    if Psi.degree > nb:
        return P_L(VectorForm.zero(split, Psi.degree))
    for (idx, j), c in Psi.terms.items():
        f = poly_subst(c, graph)
        if f.is_zero():
            continue
        base = tuple(i for i in idx if i < nb)
        form = ScalarForm._raw(split, len(base), {base: f})
        for i in idx:
            if i >= nb:
                form = wedge(form, ds[i])
        if form.is_zero():
            continue
        if split.is_fiber(j):
            for bidx, bc in form.terms.items():
                _acc(store, (bidx, j), bc)
        else:
            for r in range(nb, split.dim):
                dsr = poly_diff(comps[r], j)
                if dsr.is_zero():
                    continue
                for bidx, bc in form.terms.items():
                    _acc(store, (bidx, r), -(bc * dsr))
    return NormalValuedForm._raw(split, Psi.degree, store)


@dataclass(frozen=True)
class GraphCheckReport:
    passed: bool
    points: Tuple[Tuple[Fraction, ...], ...]
    reports: Tuple[PlaneCheckReport, ...]

    def failing_points(self):
        return [p for p, r in zip(self.points, self.reports) if not r.passed]


def graph_frame(s: NormalValuedForm, base_point: Sequence) -> Tuple[Point, KVectorFrame]:
    split = s.split
    nb = split.nbase
    x = [as_rational(c) for c in base_point]
    if len(x) != nb:
        raise ValueError(f"base point needs {nb} coordinates")
    probe = Point(split, tuple(x) + (0,) * (split.dim - nb))
    comps = {r: s.terms.get(((), r), JetPoly.zero(split)) for r in range(nb, split.dim)}
    y = [poly_eval(comps[r], probe) for r in range(nb, split.dim)]
    vecs = []
    for i in range(nb):
        v = [Fraction(int(i == k)) for k in range(nb)] + [poly_eval(poly_diff(comps[r], i), probe)
                                                         for r in range(nb, split.dim)]
        vecs.append(tuple(v))
    return Point(split, tuple(x) + tuple(y)), KVectorFrame(tuple(vecs))


def graph_check(Psi: VectorForm, s: NormalValuedForm, sample_points: Sequence[Sequence]) -> GraphCheckReport:
    """Run the plane condition on the tangent frame of the graph of ``s``."""
    reports, pts = [], []
    for bp in sample_points:
        if isinstance(bp, Point):
            bp = bp.coords[: s.split.nbase]
        gp, frame = graph_frame(s, bp)
        reports.append(plane_condition(Psi, gp, frame))
        pts.append(tuple(as_rational(c) for c in bp))
    return GraphCheckReport(all(r.passed for r in reports), tuple(pts), tuple(reports))


# diagonal identity ---------------------------------------------------------------

@dataclass(frozen=True)
class PLieEntry:
    k: int
    ratio: Optional[Fraction]
    consistent: bool
    lhs: NormalValuedForm
    rhs: NormalValuedForm


def proportionality(lhs: NormalValuedForm, rhs: NormalValuedForm) -> Tuple[bool, Optional[Fraction]]:
    """``(True, r)`` when ``lhs = r * rhs``; ``(True, None)`` when both vanish."""
    if lhs.is_zero() and rhs.is_zero():
        return True, None
    if lhs.is_zero() or rhs.is_zero():
        return False, None
    key = next(iter(rhs.terms))
    mono, q = next(iter(rhs.terms[key].terms.items()))
    lc = lhs.terms.get(key)
    if lc is None:
        return False, None
    ratio = lc.terms.get(mono, Fraction(0)) / q
    return lhs == rhs.scale(ratio), ratio


def plie_check(V: VData, xi: NormalValuedForm, kmax: int, convention: str = DEFAULT_CONVENTION) -> List[PLieEntry]:
    """Compare ``P(L_X^k Delta)`` with ``ell_k(xi, .., xi)`` for ``k = 1..kmax``."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    X = iota_L(xi)
    W = V.delta
    out = []
    for k in range(1, kmax + 1):
        W = fn_bracket(X, W)
        lhs = P_L(W)
        rhs = ell_n(V, *([xi] * k), convention=convention)
        ok, ratio = proportionality(lhs, rhs)
        out.append(PLieEntry(k, ratio, ok, lhs, rhs))
    return out
