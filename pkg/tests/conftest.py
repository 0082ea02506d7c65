import random
from fractions import Fraction

import pytest

from psideform.algebra import JetPoly, PatchSplit
from psideform.forms import ScalarForm, VectorForm
from psideform.registry import load_fixture

COEFFS = [Fraction(n, d) for n in range(-3, 4) for d in (1, 2, 3)]


def rand_poly(rng, split, terms=3, degree=2, base_only=False):
    names = split.base_vars if base_only else split.variables
    p = JetPoly.zero(split)
    for _ in range(rng.randint(0, terms)):
        exps = {}
        for _ in range(rng.randint(0, degree)):
            v = rng.choice(names)
            exps[v] = exps.get(v, 0) + 1
        p = p + JetPoly.monomial(split, exps, rng.choice(COEFFS))
    return p


def rand_sform(rng, split, degree, terms=3, coeff_degree=2):
    from itertools import combinations
    idxs = list(combinations(split.variables, degree))
    items = [(rng.choice(idxs), rand_poly(rng, split, 2, coeff_degree)) for _ in range(rng.randint(1, terms))]
    return ScalarForm.from_terms(split, degree, items)


def rand_vform(rng, split, degree, terms=3, coeff_degree=2):
    from itertools import combinations
    idxs = list(combinations(split.variables, degree))
    items = [(rng.choice(idxs), rng.choice(split.variables), rand_poly(rng, split, 2, coeff_degree))
             for _ in range(rng.randint(1, terms))]
    return VectorForm.from_terms(split, degree, items)


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture(scope="session")
def split4():
    return PatchSplit(("x1", "x2"), ("y1", "y2"), 3)


@pytest.fixture(scope="session")
def jline():
    return load_fixture("j-line")


@pytest.fixture(scope="session")
def jtwist():
    return load_fixture("j-twist")


@pytest.fixture(scope="session")
def omega4():
    return load_fixture("omega-r4")


@pytest.fixture(scope="session")
def g2():
    return load_fixture("g2-phi")


# acceptance summary -----------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {label}")
