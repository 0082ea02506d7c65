import random
from fractions import Fraction

import pytest

from psideform.algebra import PatchSplit, Point
from psideform.calibration import (
    DegenerateFrame,
    FrameError,
    KVectorFrame,
    first_cousin_residual,
    hl_constant,
    hl_residual,
    plane_condition,
)
from psideform.cli.commands import hl_oracle, random_frame
from psideform.forms import ConstMetric, GradingError, ScalarForm, VectorForm, form_value, hat
from psideform.registry import load_fixture

R4 = PatchSplit(("x1", "x2"), ("x3", "x4"), 2)
E = [tuple(int(i == j) for j in range(4)) for i in range(4)]


def test_complex_line_passes(jline):
    J = jline["J"]
    assert plane_condition(J, Point.origin(J.split), KVectorFrame((E[0], E[1]))).passed
    rep = plane_condition(J, Point.origin(J.split), KVectorFrame((E[0], E[2])))
    assert not rep.passed and rep.failing()


def test_plane_condition_errors(jline):
    J = jline["J"]
    o = Point.origin(J.split)
    with pytest.raises(DegenerateFrame):
        plane_condition(J, o, KVectorFrame((E[0], E[0])))
    with pytest.raises(FrameError):
        plane_condition(VectorForm.zero(J.split, 2), o, KVectorFrame((E[0],)))


def test_associative_plane_closed(g2):
    o = Point.origin(g2.split)
    assert plane_condition(g2["Phat"], o, g2["E123"]).passed


def test_tau_any_four_frame():
    tau = load_fixture("tau-r7")["tau"]
    rng = random.Random(5)
    for _ in range(25):
        F = random_frame(rng, 7, 4)
        p = Point(tau.split, tuple(Fraction(rng.randint(-3, 3)) for _ in range(7)))
        assert plane_condition(tau, p, F).passed


def test_plane_condition_frame_invariant(g2):
    rng = random.Random(6)
    o = Point.origin(g2.split)
    frames = [g2["E123"], random_frame(rng, 7, 3)]
    for F in frames:
        before = plane_condition(g2["Phat"], o, F).passed
        for _ in range(5):
            while True:
                m = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
                G = F.transformed(m)
                if not G.degenerate:
                    break
            assert plane_condition(g2["Phat"], o, G).passed == before


def test_cousin_examples():
    g = ConstMetric.euclidean(4)
    o = Point.origin(R4)
    phi = ScalarForm.dx(R4, "x1", "x2")
    assert first_cousin_residual(phi, g, o, KVectorFrame((E[0], E[1])), E[2]) == [0, 0]
    omega = phi + ScalarForm.dx(R4, "x3", "x4")
    assert first_cousin_residual(omega, g, o, KVectorFrame((E[0], E[2])), E[1]) == [0, -1]
    with pytest.raises(FrameError):
        first_cousin_residual(phi, g, o, KVectorFrame((E[0], E[1])), (1, 0, 1, 0))


def test_cousin_linear_in_normal(g2):
    phi, g = g2["phi"], g2["g"]
    o = Point.origin(phi.split)
    F = KVectorFrame(((1, 0, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0, 0), (0, 0, 0, 1, 0, 0, 0)))
    rng = random.Random(7)
    for _ in range(10):
        a = [0, 0, rng.randint(-3, 3), 0] + [rng.randint(-3, 3) for _ in range(3)]
        b = [0, 0, rng.randint(-3, 3), 0] + [rng.randint(-3, 3) for _ in range(3)]
        c = Fraction(rng.randint(-3, 3), 2)
        combo = [c * u + w for u, w in zip(a, b)]
        ra, rb = first_cousin_residual(phi, g, o, F, a), first_cousin_residual(phi, g, o, F, b)
        assert first_cousin_residual(phi, g, o, F, combo) == [c * u + w for u, w in zip(ra, rb)]


def test_hl_examples(g2):
    phi, chi = g2["phi"], g2["chi"]
    E123 = g2["E123"]
    for c in (0, 1, Fraction(7, 3)):
        assert hl_residual(phi, chi, E123, c) == 0
    deg = KVectorFrame(((1, 0, 0, 0, 0, 0, 0),) * 3)
    assert hl_residual(phi, chi, deg, 5) == 0
    with pytest.raises(GradingError):
        hl_residual(phi, g2["Phat"], E123, 1)


def test_hl_oracle_constant(g2):
    c, residuals = hl_oracle(g2["phi"], g2["chi"], 30, seed=3)
    assert c == 1
    assert not any(residuals)


def test_calibrated_values_bounded_by_norm(g2):
    # |phi(xi)|^2 <= |xi|^2 on random frames: phi has comass one
    rng = random.Random(8)
    phi = g2["phi"]
    o = Point.origin(phi.split)
    for _ in range(30):
        F = random_frame(rng, 7, 3)
        v = form_value(phi, o, [list(u) for u in F.vectors])
        assert v * v <= F.gram_sq
