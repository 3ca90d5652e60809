import math

import numpy as np
import pytest
import sympy
from conftest import brute_beta_float, brute_beta_sympy, surd_to_sympy, sympy_equal
from hypothesis import given, settings
from hypothesis import strategies as st

from badsci.constructions import (
    KNOWN_NAMES,
    hadamard_power,
    known_matrix,
    lift,
    lifted_beta,
    random_pm_matrix,
    random_unit_matrix,
    tree_beta_formula,
    tree_matrix,
    tree_spec,
)
from badsci.evaluate import beta_exact, beta_float
from badsci.matrix import Matrix
from badsci.surd import SurdValue


@pytest.mark.parametrize("n", range(2, 7))
def test_tree_formula_matches_sympy_enumeration(n):
    A = tree_matrix(n)
    oracle = brute_beta_sympy([r.c for r in A.rows])
    assert sympy_equal(surd_to_sympy(tree_beta_formula(n)), oracle)


def test_tree_formula_closed_form_small():
    assert tree_beta_formula(3) == (SurdValue.sqrt(2) + SurdValue.sqrt(3)) / 2
    assert tree_beta_formula(4) == SurdValue.sqrt(3)
    assert tree_beta_formula(8) == 2


@pytest.mark.parametrize("n", [2, 3, 5, 6, 7, 8, 11, 16, 30])
def test_tree_spec_shape(n):
    spec = tree_spec(n)
    assert len(spec.labels) == n
    k = n.bit_length() - 1
    assert spec.k == k
    assert spec.long_rows == (0 if n == 1 << k else 2 * (n - (1 << k)))
    A = tree_matrix(n)
    assert A.shape == (n, n)
    # rows are root-to-leaf label sequences, padded with zeros
    for row, lab in zip(A.rows, spec.labels):
        assert row.c[: len(lab)] == lab and not any(row.c[len(lab):])


def test_tree_rejects_small_and_large():
    with pytest.raises(ValueError):
        tree_spec(1)
    with pytest.raises(ValueError):
        tree_matrix(31)


def test_hadamard_power_entries_and_beta():
    for k in range(1, 4):
        H = hadamard_power(k)
        assert H.shape == (1 << k, 1 << k)
        assert H.int_array().min() >= -1 and H.int_array().max() <= 1
        assert beta_exact(H).exact == SurdValue.sqrt(k + 1)


def test_hadamard_power_k2_oracle():
    H = hadamard_power(2)
    got = surd_to_sympy(beta_exact(H).exact)
    assert sympy_equal(got, brute_beta_sympy([r.c for r in H.rows]))
    assert sympy_equal(got, sympy.sqrt(3))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lift_identity_float(n, seed):
    A = random_unit_matrix(n, n, seed=seed)
    b = beta_float(A)
    B = lift(A, b)
    assert B.shape == (2 * n, 2 * n)
    assert np.allclose(np.linalg.norm(B.to_array(), axis=1), 1.0, atol=1e-12)
    expected = math.sqrt(brute_beta_float(A.to_array()) ** 2 + 1)
    assert brute_beta_float(B.to_array()) == pytest.approx(expected, abs=1e-12)
    assert lifted_beta(b).approx == pytest.approx(expected, abs=1e-12)


def test_lift_int_branch_is_exact():
    A = tree_matrix(4)
    b = beta_exact(A)
    B = lift(A, b)
    assert B.is_int
    assert beta_exact(B).exact == lifted_beta(b).exact == 2


def test_lift_falls_back_to_float_rows():
    # best5 has beta^2 irrational: the lifted rows cannot stay integral
    A = known_matrix("best5")
    b = beta_exact(A)
    B = lift(A, b)
    assert not B.is_int
    assert beta_float(B).approx == pytest.approx(math.sqrt(b.approx**2 + 1), abs=1e-12)
    assert lifted_beta(b).exact is None


def test_lift_rejects_non_square():
    with pytest.raises(ValueError):
        lift(Matrix.from_int([[1, 1, 0], [1, -1, 0]]), beta_exact(Matrix.from_int([[1, 1, 0], [1, -1, 0]])))


def test_known_matrices():
    assert set(KNOWN_NAMES) == {"opt2", "opt3", "opt4", "best5", "conj2xn"}
    assert known_matrix("conj2xn(7)") == known_matrix("conj2xn", n=7)
    assert beta_exact(known_matrix("conj2xn(7)")).exact == SurdValue.sqrt(2)
    assert beta_exact(known_matrix("opt4")).exact == SurdValue.sqrt(3)
    with pytest.raises(KeyError):
        known_matrix("opt9")
    with pytest.raises(ValueError):
        known_matrix("conj2xn")


def test_known_opt3_literal_value():
    # the literal rows are unit vectors; their objective is about 1.38388
    arr = known_matrix("opt3").to_array()
    assert np.allclose(np.linalg.norm(arr, axis=1), 1.0)
    assert beta_float(known_matrix("opt3")).approx == pytest.approx(brute_beta_float(arr), abs=1e-15)


def test_random_generators_are_seeded():
    assert random_pm_matrix(6, seed=4) == random_pm_matrix(6, seed=4)
    assert random_unit_matrix(3, 5, seed=4) == random_unit_matrix(3, 5, seed=4)
    A = random_pm_matrix(6, seed=4, m=2)
    assert A.shape == (2, 6) and set(np.abs(A.int_array()).ravel()) == {1}
