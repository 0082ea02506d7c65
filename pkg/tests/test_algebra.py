from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from psideform.algebra import (
    AlgebraError,
    JetPoly,
    PatchSplit,
    Point,
    SplitMismatch,
    as_rational,
    format_rational,
    poly_diff,
    poly_eval,
    poly_mul,
    poly_subst,
)

S2 = PatchSplit(("x1", "x2"), ("y1", "y2"), 2)
S1 = PatchSplit(("x1", "x2"), ("y1", "y2"), 1)


def v(name, split=S2):
    return JetPoly.var(split, name)


def test_difference_of_squares_and_truncation():
    assert poly_mul(v("x1") + v("y1"), v("x1") - v("y1")) == v("x1") ** 2 - v("y1") ** 2
    a, b = v("x1", S1) + v("y1", S1), v("x1", S1) - v("y1", S1)
    assert poly_mul(a, b) == v("x1", S1) ** 2


def test_zero_annihilates():
    p = v("x1") * v("y2") + 3
    assert poly_mul(JetPoly.zero(S2), p).is_zero()


def test_diff_examples():
    assert poly_diff(v("x1") ** 2 * v("y1"), "x1") == v("x1") * v("y1") * 2
    assert poly_diff(v("x1") ** 2, "y1").is_zero()
    assert poly_diff(JetPoly.const(S2, Fraction(7, 3)), "x1").is_zero()


def test_eval_examples():
    small = PatchSplit(("x1",), ("y1",), 2)
    p = JetPoly.var(small, "x1") ** 2 + JetPoly.var(small, "y1")
    assert poly_eval(p, Point.from_mapping(small, {"x1": 2, "y1": Fraction(1, 2)})) == Fraction(9, 2)
    pt = Point(S2, (2, 0, Fraction(1, 2), 0))
    q = v("x2") * v("y2") - Fraction(5, 4)
    assert poly_eval(q, Point.origin(S2)) == q.constant_term()
    assert poly_eval(JetPoly.zero(S2), pt) == 0


def test_subst_examples():
    assert poly_subst(v("y1") ** 2, {"y1": v("x1")}) == v("x1") ** 2
    p = v("x1") * v("y2") + v("y1")
    assert poly_subst(p, {}) == p
    assert poly_subst(v("x1") * v("y1"), {"y1": JetPoly.zero(S2)}).is_zero()


def test_rationals_lowest_terms():
    assert format_rational(Fraction(-3, 6)) == "-1/2"
    assert as_rational("4/-8") == Fraction(-1, 2)
    with pytest.raises(AlgebraError, match="zero denominator"):
        as_rational("1/0")
    with pytest.raises(AlgebraError):
        as_rational(0.5)


def test_truncation_on_construction():
    p = JetPoly.monomial(S1, {"y1": 1, "y2": 1})
    assert p.is_zero()
    assert JetPoly.monomial(S1, {"x1": 5, "y2": 1}).fiber_degree() == 1


def test_text_rendering():
    p = v("x1") ** 2 - v("x1") * v("y1") * Fraction(1, 2) + 3
    assert p.to_text() == "x1^2 - 1/2*x1*y1 + 3"
    assert JetPoly.zero(S2).to_text() == "0"


def test_split_validation():
    with pytest.raises(AlgebraError):
        PatchSplit(("x1", "x1"), ("y1",), 1)
    other = PatchSplit(("x1", "x2"), ("y1", "y2"), 3)
    with pytest.raises(SplitMismatch):
        v("x1") + JetPoly.var(other, "x1")


def test_restrict_to_base():
    p = v("x1") * v("y1") + v("x2") ** 2
    assert p.restrict_to_base() == v("x2") ** 2


# property tests -----------------------------------------------------------------

def polys(split):
    mono = st.fixed_dictionaries({n: st.integers(0, 2) for n in split.variables})
    coeff = st.fractions(min_value=-4, max_value=4, max_denominator=4)
    return st.lists(st.tuples(mono, coeff), max_size=4).map(
        lambda items: sum((JetPoly.monomial(split, m, c) for m, c in items), JetPoly.zero(split)))


@settings(max_examples=60, deadline=None)
@given(polys(S2), polys(S2), polys(S2))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@settings(max_examples=60, deadline=None)
@given(polys(S2), polys(S2), st.sampled_from(S2.base_vars))
def test_leibniz_base(a, b, var):
    assert poly_diff(a * b, var) == poly_diff(a, var) * b + a * poly_diff(b, var)


S_LOW = PatchSplit(("x1", "x2"), ("y1", "y2"), 1)


@settings(max_examples=60, deadline=None)
@given(polys(S2), polys(S2), st.sampled_from(S2.fiber_vars))
def test_leibniz_fiber_one_jet_lower(a, b, var):
    # a fiber derivative lowers the fiber degree, so the product rule only
    # survives modulo jets of order T - 1
    def low(p):
        return JetPoly(S_LOW, p.terms)
    assert low(poly_diff(a * b, var)) == low(poly_diff(a, var) * b + a * poly_diff(b, var))


@settings(max_examples=60, deadline=None)
@given(polys(S2), polys(S2), polys(S2))
def test_subst_is_ring_map(a, b, image):
    m = {"y1": image, "x2": v("x1") + 1}
    assert poly_subst(a * b, m) == poly_subst(a, m) * poly_subst(b, m)
    assert poly_subst(a + b, m) == poly_subst(a, m) + poly_subst(b, m)


@settings(max_examples=40, deadline=None)
@given(polys(S2), polys(S2))
def test_canonical_form(a, b):
    left, right = a + b, b + a
    assert list(left.terms.items()) == list(right.terms.items())
    assert hash(left) == hash(right)
