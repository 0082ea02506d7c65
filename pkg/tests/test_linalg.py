import random
from fractions import Fraction

import pytest

from psideform import linalg


def rand_matrix(rng, r, c):
    return [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(c)] for _ in range(r)]


def test_rank_and_nullspace_agree():
    rng = random.Random(3)
    for _ in range(30):
        r, c = rng.randint(1, 5), rng.randint(1, 6)
        m = rand_matrix(rng, r, c)
        ker = linalg.nullspace(m, c)
        assert len(ker) + linalg.rank(m, c) == c
        for k in ker:
            assert not any(linalg.matvec(m, k))


def test_solve_and_inconsistency():
    m = [[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]]
    assert linalg.solve(m, [Fraction(1), Fraction(3)], 2) is None
    x = linalg.solve(m, [Fraction(1), Fraction(2)], 2)
    assert linalg.matvec(m, x) == [1, 2]


def test_inverse_det():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    assert linalg.det(m) == 1
    inv = linalg.inverse(m)
    assert [linalg.matvec(m, col) for col in linalg.transpose(inv)] == [[1, 0], [0, 1]]
    with pytest.raises(ZeroDivisionError):
        linalg.inverse([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])


def test_span_and_residual():
    vecs = [[Fraction(1), Fraction(0), Fraction(0)], [Fraction(0), Fraction(1), Fraction(0)]]
    assert linalg.in_span(vecs, [Fraction(3), Fraction(-1), Fraction(0)])
    assert linalg.orthogonal_residual(vecs, [Fraction(3), Fraction(1), Fraction(5)]) == [0, 0, 5]


def test_min_norm_representative_is_orthogonal_to_kernel():
    rng = random.Random(9)
    m = rand_matrix(rng, 2, 4)
    ker = linalg.nullspace(m, 4)
    x = [Fraction(rng.randint(-3, 3)) for _ in range(4)]
    y = linalg.min_norm_representative(x, ker)
    assert linalg.matvec(m, y) == linalg.matvec(m, x)
    for k in ker:
        assert sum(a * b for a, b in zip(y, k)) == 0
