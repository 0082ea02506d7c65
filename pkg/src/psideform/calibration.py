"""Pointwise checks on decomposable k-vectors.

Frames are kept unnormalized and every norm is squared, so all quantities
stay rational.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from . import linalg
from .algebra import AlgebraError, Point, as_rational
from .forms import ConstMetric, GradingError, ScalarForm, VectorForm, eval_on_vectors, form_value, small_det


class DegenerateFrame(AlgebraError):
    pass


class FrameError(AlgebraError):
    pass


@dataclass(frozen=True)
class KVectorFrame:
    """Unnormalized frame ``v1 ^ .. ^ vk`` with its squared norm."""

    vectors: Tuple[Tuple[Fraction, ...], ...]
    metric: Optional[ConstMetric] = None
    gram_sq: Fraction = field(init=False)

    def __post_init__(self):
        vecs = tuple(tuple(as_rational(c) for c in v) for v in self.vectors)
        if vecs and len({len(v) for v in vecs}) != 1:
            raise FrameError("frame vectors must share one dimension")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "gram_sq", small_det(self.gram()) if vecs else Fraction(1))

    def gram(self) -> List[List[Fraction]]:
        if self.metric is None:
            return [[sum((a * b for a, b in zip(u, v)), Fraction(0)) for v in self.vectors] for u in self.vectors]
        return [[self.metric.inner(u, v) for v in self.vectors] for u in self.vectors]

    @property
    def size(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0

    @property
    def degenerate(self) -> bool:
        return self.gram_sq == 0

    def transformed(self, matrix: Sequence[Sequence]) -> "KVectorFrame":
        """Frame ``w_i = sum_j m_ij v_j`` spanning the same space when ``m`` is invertible."""
        m = [[as_rational(c) for c in row] for row in matrix]
        vecs = [[sum((m[i][j] * self.vectors[j][c] for j in range(self.size)), Fraction(0))
                 for c in range(self.dim)] for i in range(self.size)]
        return KVectorFrame(tuple(map(tuple, vecs)), self.metric)


@dataclass(frozen=True)
class PlaneCheckReport:
    passed: bool
    residuals: Tuple[Tuple[Tuple[int, ...], Tuple[Fraction, ...]], ...]

    def failing(self):
        return [(idx, r) for idx, r in self.residuals if any(r)]


def plane_condition(Psi: VectorForm, p: Point, frame: KVectorFrame) -> PlaneCheckReport:
    """Whether ``Psi_p`` maps every ``deg Psi``-subset of the frame into its span."""
    k = Psi.degree
    if frame.dim != Psi.split.dim:
        raise FrameError(f"frame lives in dimension {frame.dim}, patch has {Psi.split.dim}")
    if frame.size < k:
        raise FrameError(f"frame of size {frame.size} is too small for a degree-{k} form")
    if frame.degenerate:
        raise DegenerateFrame("frame vectors are linearly dependent")
    vecs = [list(v) for v in frame.vectors]
    out = []
    for subset in combinations(range(frame.size), k):
        value = eval_on_vectors(Psi, p, [vecs[i] for i in subset])
        out.append((subset, tuple(linalg.orthogonal_residual(vecs, value))))
    return PlaneCheckReport(all(not any(r) for _, r in out), tuple(out))


def first_cousin_residual(phi: ScalarForm, g: ConstMetric, p: Point, frame: KVectorFrame,
                          normal: Sequence) -> List[Fraction]:
    """Values ``phi_p(normal, v1, .., v_i omitted, .., vk)`` for ``i = 1..k``."""
    k = phi.degree
    if frame.size != k:
        raise FrameError(f"need a {k}-frame, got {frame.size} vectors")
    if frame.degenerate:
        raise DegenerateFrame("frame vectors are linearly dependent")
    n = [as_rational(c) for c in normal]
    if len(n) != phi.split.dim:
        raise FrameError("normal vector has the wrong dimension")
    for v in frame.vectors:
        if g.inner(n, v) != 0:
            raise FrameError("normal vector is not orthogonal to the frame")
    vecs = [list(v) for v in frame.vectors]
    return [form_value(phi, p, [n] + vecs[:i] + vecs[i + 1:]) for i in range(k)]


def _hl_terms(phi: ScalarForm, PsiE: VectorForm, frame: KVectorFrame, g: ConstMetric, p: Optional[Point]):
    if phi.degree != frame.size or PsiE.degree != frame.size:
        raise GradingError("hl_residual needs deg phi = deg PsiE = frame size")
    if p is None:
        p = Point.origin(phi.split)
    vecs = [list(v) for v in frame.vectors]
    val = form_value(phi, p, vecs)
    vec = eval_on_vectors(PsiE, p, vecs)
    gram = small_det([[g.inner(u, v) for v in vecs] for u in vecs])
    return val * val, g.inner(vec, vec), gram


def hl_residual(phi: ScalarForm, PsiE: VectorForm, frame: KVectorFrame, c,
                g: Optional[ConstMetric] = None, p: Optional[Point] = None) -> Fraction:
    """``phi(xi)^2 + c |PsiE(xi)|^2 - |xi|^2`` for ``xi = v1 ^ .. ^ vk``."""
    g = g or ConstMetric.euclidean(phi.split.dim)
    a, b, gram = _hl_terms(phi, PsiE, frame, g, p)
    return a + as_rational(c) * b - gram


def hl_constant(phi: ScalarForm, PsiE: VectorForm, frame: KVectorFrame,
                g: Optional[ConstMetric] = None, p: Optional[Point] = None) -> Fraction:
    """Solve for the constant making the residual vanish at one sample."""
    g = g or ConstMetric.euclidean(phi.split.dim)
    a, b, gram = _hl_terms(phi, PsiE, frame, g, p)
    if b == 0:
        raise FrameError("sample has vanishing PsiE(xi); the constant is undetermined there")
    return (gram - a) / b
