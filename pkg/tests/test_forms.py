import random
from fractions import Fraction
from itertools import combinations

import pytest

from psideform.algebra import JetPoly, PatchSplit, Point
from psideform.forms import (
    ConstMetric,
    GradingError,
    PatchMap,
    ScalarForm,
    UnsupportedMap,
    VectorForm,
    eval_on_vectors,
    ext_d,
    fn_bracket,
    form_value,
    graded_commutator_on,
    hat,
    insert_K,
    lie_deriv,
    pullback,
    tau_from_phi,
    wedge,
)

from conftest import rand_poly, rand_sform, rand_vform

# jet order high enough that nothing in these tests is truncated
BIG = PatchSplit(("x1", "x2"), ("y1", "y2"), 12)
R4 = PatchSplit(("x1", "x2"), ("x3", "x4"), 12)


def x(name, split=BIG):
    return JetPoly.var(split, name)


def dx(*names, split=BIG):
    return ScalarForm.dx(split, *names)


def vf(split=BIG, **comps):
    return VectorForm.vector_field(split, comps)


def test_wedge_examples():
    assert wedge(dx("x1"), dx("x2")).terms == {(0, 1): JetPoly.const(BIG, 1)}
    assert wedge(dx("x1"), dx("x1")).is_zero()
    assert wedge(dx("x1").scale(x("x1")), dx("x2")) == dx("x1", "x2").scale(x("x1"))
    assert wedge(dx("x2"), dx("x1")) == -dx("x1", "x2")


def test_ext_d_examples():
    assert ext_d(dx("x2").scale(x("x1"))) == dx("x1", "x2")
    assert ext_d(ScalarForm.function(JetPoly.const(BIG, 5))).is_zero()
    f = ScalarForm.function(x("x1") ** 2 * x("x2"))
    assert ext_d(ext_d(f)).is_zero()


def test_insertion_examples():
    K = VectorForm.from_terms(BIG, 1, [(("x1",), "x2", 1)])
    assert insert_K(K, dx("x2")) == dx("x1")
    assert insert_K(K, dx("y1")).is_zero()
    assert insert_K(K, ScalarForm.function(x("x1"))).is_zero()


def test_lie_derivative_examples():
    assert lie_deriv(vf(x1=1), dx("x2").scale(x("x1"))) == dx("x2")
    K = VectorForm.from_terms(BIG, 1, [(("x1",), "x1", 1)])
    assert lie_deriv(K, ScalarForm.function(x("x1"))) == dx("x1")
    rng = random.Random(1)
    for _ in range(10):
        f = ScalarForm.function(rand_poly(rng, BIG))
        K = rand_vform(rng, BIG, rng.randint(0, 2))
        assert lie_deriv(K, f) == insert_K(K, ext_d(f))


def test_bracket_of_vector_fields_is_lie_bracket():
    rng = random.Random(2)
    n = BIG.dim
    for _ in range(10):
        X = {v: rand_poly(rng, BIG) for v in BIG.variables}
        Y = {v: rand_poly(rng, BIG) for v in BIG.variables}
        expected = {}
        for j, vj in enumerate(BIG.variables):
            expected[vj] = sum((X[vi] * Y[vj].diff(i) - Y[vi] * X[vj].diff(i)
                                for i, vi in enumerate(BIG.variables)), JetPoly.zero(BIG))
        assert fn_bracket(VectorForm.vector_field(BIG, X), VectorForm.vector_field(BIG, Y)) == \
            VectorForm.vector_field(BIG, expected)


def test_bracket_examples():
    J = VectorForm.from_terms(BIG, 1, [(("x1",), "x2", 1), (("x2",), "x1", -1), (("y1",), "y2", 3)])
    C = VectorForm.from_terms(BIG, 2, [(("x1", "y2"), "y1", Fraction(1, 2))])
    assert fn_bracket(J, C).is_zero()
    K = VectorForm.from_terms(R4, 1, [(("x2",), "x3", x("x1", R4))])
    assert fn_bracket(vf(R4, x1=1), K) == VectorForm.from_terms(R4, 1, [(("x2",), "x3", 1)])


def test_hat_examples():
    assert hat(dx("x1"), ConstMetric.euclidean(4)) == vf(x1=1)
    omega = ScalarForm.dx(R4, "x1", "x2") + ScalarForm.dx(R4, "x3", "x4")
    expected = VectorForm.from_terms(R4, 1, [(("x2",), "x1", 1), (("x1",), "x2", -1),
                                            (("x4",), "x3", 1), (("x3",), "x4", -1)])
    assert hat(omega, ConstMetric.euclidean(4)) == expected
    assert hat(dx("x1"), ConstMetric.diag([4, 1, 1, 1])) == vf(x1=Fraction(1, 4))


def test_metric_validation():
    with pytest.raises(ValueError):
        ConstMetric(((1, 2), (0, 1)))
    with pytest.raises(ValueError):
        ConstMetric(((1, 1), (1, 1)))


def test_pullback_examples():
    K = VectorForm.from_terms(BIG, 2, [(("x1", "y1"), "y2", x("x2") * x("y1"))])
    assert pullback(PatchMap.identity(BIG), K) == K
    f = PatchMap.linear(BIG, [[2 if i == j else 0 for j in range(4)] for i in range(4)])
    assert pullback(f, vf(x1=1)) == vf(x1=Fraction(1, 2))
    with pytest.raises(UnsupportedMap):
        PatchMap.shear(BIG, {"x1": x("x2")})
    with pytest.raises(UnsupportedMap):
        PatchMap.linear(BIG, [[0] * 4] * 4)


def test_shear_inverse_round_trip():
    s = PatchMap.shear(BIG, {"y1": x("x1") ** 2, "y2": x("x2") - 1})
    K = VectorForm.from_terms(BIG, 1, [(("x1",), "y2", x("y1") * x("x2")), (("y2",), "x1", 2)])
    assert pullback(s.inverse(), pullback(s, K)) == K


def test_eval_examples():
    J = VectorForm.from_terms(R4, 1, [(("x1",), "x2", 1), (("x2",), "x1", -1),
                                      (("x3",), "x4", 1), (("x4",), "x3", -1)])
    p = Point.origin(R4)
    assert eval_on_vectors(J, p, [(1, 0, 0, 0)]) == [0, 1, 0, 0]
    C = VectorForm.from_terms(R4, 2, [(("x1", "x2"), "x3", 1)])
    assert eval_on_vectors(C, p, [(1, 2, 0, 0), (2, 4, 0, 0)]) == [0, 0, 0, 0]
    with pytest.raises(GradingError):
        eval_on_vectors(C, p, [(1, 0, 0, 0)])
    assert form_value(ScalarForm.dx(R4, "x1", "x2"), p, [(1, 0, 0, 0), (0, 1, 0, 0)]) == 1


def test_cross_degree_comparison_is_error():
    with pytest.raises(GradingError):
        ScalarForm.zero(BIG, 1) == ScalarForm.zero(BIG, 2)
    assert VectorForm.zero(BIG, 2).to_text() == "0"


def test_tau_matches_defining_formula():
    S7 = PatchSplit(("x1", "x2", "x3", "x4"), ("y1", "y2", "y3"), 2)
    rng = random.Random(4)
    phi = rand_sform(rng, S7, 3, terms=6, coeff_degree=0)
    tau = tau_from_phi(phi)
    p = Point.origin(S7)
    for _ in range(10):
        vs = [[Fraction(rng.randint(-2, 2)) for _ in range(7)] for _ in range(4)]
        a, b, c, d = vs
        val = lambda *args: form_value(phi, p, list(args))
        want = [-(val(b, c, d) * a[i] + val(c, a, d) * b[i] + val(a, b, d) * c[i] + val(b, a, c) * d[i])
                for i in range(7)]
        assert eval_on_vectors(tau, p, vs) == want


# property tests -------------------------------------------------------------------

def _triples(seed, count, max_deg=2):
    rng = random.Random(seed)
    for _ in range(count):
        yield tuple(rand_vform(rng, BIG, rng.randint(0, max_deg)) for _ in range(3)), rng


def test_graded_antisymmetry():
    for (K, L, _), _ in _triples(11, 40):
        if K.degree + L.degree > BIG.dim:
            continue
        sign = -1 if (K.degree * L.degree) % 2 == 0 else 1
        assert fn_bracket(K, L) == fn_bracket(L, K).scale(sign)


def test_graded_jacobi():
    count = 0
    for (K, L, M), _ in _triples(12, 40, max_deg=1):
        k, l = K.degree, L.degree
        lhs = fn_bracket(K, fn_bracket(L, M))
        rhs = fn_bracket(fn_bracket(K, L), M) + fn_bracket(L, fn_bracket(K, M)).scale((-1) ** (k * l))
        assert lhs == rhs
        count += 1
    assert count == 40


def test_bracket_realizes_commutator_of_lie_derivatives():
    for (K, L, _), rng in _triples(13, 30, max_deg=1):
        b = rand_sform(rng, BIG, rng.randint(0, 2))
        if K.degree + L.degree + b.degree > BIG.dim:
            continue
        assert lie_deriv(fn_bracket(K, L), b) == graded_commutator_on(K, L, b)


def test_lie_derivative_commutes_with_d():
    for (K, _, _), rng in _triples(14, 20, max_deg=2):
        b = rand_sform(rng, BIG, rng.randint(0, 1))
        if K.degree + b.degree + 1 > BIG.dim:
            continue
        k = K.degree
        # [L_K, d] = L_K d - (-1)^k d L_K = 0
        lhs = lie_deriv(K, ext_d(b))
        rhs = ext_d(lie_deriv(K, b)).scale((-1) ** k)
        assert lhs == rhs


def test_d_squared_and_insertion_leibniz():
    rng = random.Random(15)
    for _ in range(20):
        a = rand_sform(rng, BIG, rng.randint(0, 2))
        b = rand_sform(rng, BIG, rng.randint(0, 1))
        assert ext_d(ext_d(a)).is_zero() or ext_d(a).degree + 1 > BIG.dim
        K = rand_vform(rng, BIG, rng.randint(0, 2))
        if a.degree + b.degree + K.degree - 1 > BIG.dim or a.degree + b.degree > BIG.dim:
            continue
        # i_K is a derivation of degree k - 1
        sign = -1 if ((K.degree - 1) * a.degree) % 2 else 1
        assert insert_K(K, wedge(a, b)) == wedge(insert_K(K, a), b) + wedge(a, insert_K(K, b)).scale(sign)


def _fiber_preserving_matrix(rng, split):
    n, nb = split.dim, split.nbase
    while True:
        m = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        for r in range(nb, n):
            for c in range(nb):
                m[r][c] = Fraction(0)
        try:
            return PatchMap.linear(split, m)
        except UnsupportedMap:
            continue


def test_naturality_linear():
    rng = random.Random(16)
    for _ in range(20):
        f = _fiber_preserving_matrix(rng, BIG)
        K, L = rand_vform(rng, BIG, rng.randint(0, 1)), rand_vform(rng, BIG, rng.randint(0, 2))
        assert pullback(f, fn_bracket(K, L)) == fn_bracket(pullback(f, K), pullback(f, L))


def test_naturality_shear():
    rng = random.Random(17)
    for _ in range(10):
        f = PatchMap.shear(BIG, {"y1": rand_poly(rng, BIG, base_only=True), "y2": rand_poly(rng, BIG, base_only=True)})
        K, L = rand_vform(rng, BIG, rng.randint(0, 1)), rand_vform(rng, BIG, rng.randint(0, 2))
        assert pullback(f, fn_bracket(K, L)) == fn_bracket(pullback(f, K), pullback(f, L))


@pytest.mark.parametrize("name,form", [("omega", "omega"), ("g2", "phi"), ("g2", "psi")])
def test_parallel_forms_square_zero(name, form, omega4, g2):
    fx = {"omega": omega4, "g2": g2}[name]
    phi = fx[form]
    K = hat(phi, ConstMetric.euclidean(phi.split.dim))
    assert fn_bracket(K, K).is_zero()
