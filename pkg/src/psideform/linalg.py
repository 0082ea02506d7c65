"""Exact linear algebra over the rationals.

Thin adapters around sympy's ``DomainMatrix`` over ``QQ``; inputs and
outputs are plain lists of :class:`fractions.Fraction`.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Matrix = List[List[Fraction]]
Vector = List[Fraction]


def _to_dm(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> DomainMatrix:
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if nrows else 0
    data = [[QQ(int(Fraction(c).numerator), int(Fraction(c).denominator)) for c in row] for row in rows]
    return DomainMatrix(data, (nrows, ncols), QQ)


def _from_q(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _to_rows(dm: DomainMatrix) -> Matrix:
    return [[_from_q(c) for c in row] for row in dm.to_list()]


def rank(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> int:
    if not rows or (ncols is not None and ncols == 0):
        return 0
    return _to_dm(rows, ncols).rank()


def rref(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None):
    """Reduced row echelon form and pivot columns."""
    if not rows:
        return [], ()
    red, pivots = _to_dm(rows, ncols).rref()
    return _to_rows(red), tuple(pivots)


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[Vector]:
    """Basis of ``{v : rows @ v = 0}`` (one vector per free column)."""
    if ncols == 0:
        return []
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -red[r][f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], ncols: int) -> Optional[Vector]:
    """One solution of ``rows @ v = rhs`` (free variables zero), or None."""
    if not rows:
        return [Fraction(0)] * ncols if not any(rhs) else None
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    v = [Fraction(0)] * ncols
    for r, p in enumerate(pivots):
        v[p] = red[r][ncols]
    return v


def matvec(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in rows]


def transpose(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> Matrix:
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    return [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]


def inverse(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(rows)
    dm = _to_dm(rows, n)
    if dm.rank() != n:
        raise ZeroDivisionError("matrix is singular")
    return _to_rows(dm.inv())


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    if not rows:
        return Fraction(1)
    return _from_q(_to_dm(rows, len(rows)).det())


def in_span(vectors: Sequence[Sequence[Fraction]], w: Sequence[Fraction]) -> bool:
    """Whether ``w`` is a linear combination of ``vectors``."""
    if not any(w):
        return True
    if not vectors:
        return False
    # columns of the system are the spanning vectors
    system = [list(r) for r in zip(*vectors)]
    return solve(system, list(w), len(vectors)) is not None


def orthogonal_residual(vectors: Sequence[Sequence[Fraction]], w: Sequence[Fraction]) -> Vector:
    """Component of ``w`` orthogonal (Euclidean) to the span of ``vectors``."""
    w = [Fraction(c) for c in w]
    if not vectors:
        return w
    gram = [[sum(a * b for a, b in zip(u, v)) for v in vectors] for u in vectors]
    rhs = [sum(a * b for a, b in zip(u, w)) for u in vectors]
    coeffs = solve(gram, rhs, len(vectors))
    # gram is PSD so the projection equations are always consistent
    proj = [sum(c * v[i] for c, v in zip(coeffs, vectors)) for i in range(len(w))]
    return [a - b for a, b in zip(w, proj)]


def min_norm_representative(x: Vector, kernel: Sequence[Vector]) -> Vector:
    """Subtract from ``x`` its projection onto span(kernel) (Euclidean)."""
    if not kernel:
        return list(x)
    return orthogonal_residual(kernel, x)
