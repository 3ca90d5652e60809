"""Shared oracles and fixtures.

The oracles here are deliberately naive and share no code with the package's
engines: plain itertools enumeration, sympy radicals, Python floats.
"""

import itertools
import os

import numpy as np
import pytest
import sympy

ACCEPTANCE_LINES = []


def brute_beta_float(arr):
    """Mean over all sign vectors of max |a_i . x|, in plain floats."""
    arr = np.asarray(arr, dtype=float)
    n = arr.shape[1]
    total = 0.0
    for x in itertools.product((-1.0, 1.0), repeat=n):
        total += max(abs(sum(a * v for a, v in zip(row, x))) for row in arr)
    return total / 2**n


def brute_beta_sympy(int_rows):
    """Exact objective of integer-direction rows as a sympy number."""
    n = len(int_rows[0])
    norms = [sympy.sqrt(sum(v * v for v in r)) for r in int_rows]
    total = sympy.Integer(0)
    for x in itertools.product((-1, 1), repeat=n):
        vals = [abs(sum(c * v for c, v in zip(r, x))) / nr for r, nr in zip(int_rows, norms)]
        best = vals[0]
        for v in vals[1:]:
            if (v - best).evalf(50) > 0:
                best = v
        total += best
    return sympy.nsimplify(sympy.radsimp(total / 2**n))


def surd_to_sympy(value):
    return sum((sympy.Rational(q.numerator, q.denominator) * sympy.sqrt(d) for d, q in value.items()), sympy.Integer(0))


def sympy_equal(a, b):
    return sympy.simplify(sympy.radsimp(a - b)) == 0


def random_unit_rows(rng, m, n):
    A = rng.standard_normal((m, n))
    return A / np.linalg.norm(A, axis=1)[:, None]


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure evaluation only."""
    from badsci.constructions import known_matrix, random_unit_matrix
    from badsci.evaluate import beta_exact, beta_float, partition
    from badsci.search import exhaustive_search

    beta_exact(known_matrix("opt2"))
    beta_float(random_unit_matrix(2, 2, seed=0))
    partition(known_matrix("opt2"))
    partition(random_unit_matrix(2, 2, seed=0))
    exhaustive_search(2, 2)
    exhaustive_search(3, 3)


def extended_enabled():
    return os.environ.get("BADSCI_EXTENDED") == "1"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
