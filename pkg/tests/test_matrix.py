import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from badsci.errors import MatrixFormatError
from badsci.matrix import (
    ZERO_ROW,
    FloatRow,
    IntRow,
    Matrix,
    all_vertices,
    canonical_row,
    load_matrix,
    parse_matrix,
    row_from_subset,
    serialize_matrix,
    vertex_mask,
    vertex_vector,
)


def test_introw_norm_and_squares():
    r = IntRow((1, -2, 2))
    assert r.N == 9
    assert sum(r.entry_squares()) == 1
    assert np.allclose(r.entries(), [1 / 3, -2 / 3, 2 / 3])
    with pytest.raises(ValueError):
        IntRow((0, 0))


def test_canonical_row():
    assert canonical_row((-2, 4, 0)).p == (1, -2, 0)
    assert canonical_row(IntRow((0, -3, -3))).p == (0, 1, 1)
    assert canonical_row((3, 3)) == canonical_row((-1, -1))
    with pytest.raises(ValueError):
        canonical_row((0, 0))


def test_vertex_encoding():
    assert vertex_vector(0b101, 3) == (1, -1, 1)
    assert vertex_mask((1, -1, 1)) == 0b101
    V = all_vertices(3)
    assert V.shape == (8, 3)
    for t in range(8):
        assert tuple(V[t]) == vertex_vector(t, 3)
    with pytest.raises(ValueError):
        vertex_mask((1, 0))


def test_row_from_subset():
    assert row_from_subset([(1, 1), (1, -1)]) == IntRow((2, 0))
    assert row_from_subset([0b11, 0b01], n=2) == IntRow((2, 0))
    assert row_from_subset([(1, 1), (-1, -1)]) is ZERO_ROW
    assert row_from_subset([], n=3) is ZERO_ROW
    with pytest.raises(ValueError):
        row_from_subset([3])


def test_matrix_validation():
    with pytest.raises(MatrixFormatError):
        Matrix(())
    with pytest.raises(MatrixFormatError):
        Matrix((IntRow((1, 0)), FloatRow((1.0, 0.0))))
    with pytest.raises(MatrixFormatError):
        Matrix.from_int([[1, 0], [1, 0, 0]])


def test_frobenius_exact():
    A = Matrix.from_int([[1, 1], [1, -1], [3, 4]])
    assert A.frobenius_sq() == Fraction(3)
    B = Matrix.from_float([[1, 2], [3, 4]])
    assert B.frobenius_sq() == pytest.approx(2.0, abs=1e-15)


def test_int_array_big_entries():
    A = Matrix.from_int([[2**70, 1]])
    assert A.int_array().dtype == object
    assert Matrix.from_int([[1, 2]]).int_array().dtype == np.int64


def test_parse_int_and_float():
    A = parse_matrix('{"m": 2, "n": 2, "label": "h", "rows": [{"int_vec": [1, 1]}, {"int_vec": [1, -1]}]}')
    assert A.is_int and A.shape == (2, 2) and A.label == "h"
    s = 1 / math.sqrt(2)
    B = parse_matrix(json.dumps({"rows": [{"float_vec": [s, s]}]}))
    assert not B.is_int and B.rows[0].v == (s, s)


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"rows": []}',
        '{"rows": [{"int_vec": [0, 0]}]}',
        '{"rows": [{"int_vec": [1.5, 1]}]}',
        '{"rows": [{"int_vec": ["a", 1]}]}',
        '{"rows": [{"float_vec": [1, 1]}]}',
        '{"rows": [{"int_vec": [1, 1]}, {"float_vec": [1, 0]}]}',
        '{"rows": [{"int_vec": [1, 1]}, {"int_vec": [1]}]}',
        '{"m": 3, "rows": [{"int_vec": [1, 1]}]}',
        '{"rows": [{"vec": [1, 1]}]}',
    ],
)
def test_parse_rejects(text):
    with pytest.raises(MatrixFormatError):
        parse_matrix(text)


def test_parse_near_unit_rows():
    with pytest.warns(UserWarning):
        A = parse_matrix('{"rows": [{"float_vec": [1.0000001, 0]}]}')
    assert A.rows[0].v == (1.0, 0.0)
    A = parse_matrix('{"rows": [{"float_vec": [3, 4]}]}', normalize=True)
    assert A.rows[0].v == pytest.approx((0.6, 0.8))


def test_serialize_round_trip(tmp_path):
    A = Matrix.from_int([[1, 2, 0], [0, 0, -5]], label="x")
    path = tmp_path / "a.json"
    path.write_text(serialize_matrix(A))
    assert load_matrix(path) == A
    B = Matrix.from_float([[0.1, 0.7, -0.2], [1, 0, 0]])
    assert parse_matrix(serialize_matrix(B)) == B


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6).filter(any))
def test_canonical_row_properties(c):
    p = canonical_row(c).p
    assert math.gcd(*map(abs, p)) == 1
    assert next(v for v in p if v) > 0
    assert canonical_row([-v for v in c]) == canonical_row(c)
    assert canonical_row([3 * v for v in c]) == canonical_row(c)
