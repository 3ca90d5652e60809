"""Row and matrix representations plus the JSON matrix format.

Rows come in two kinds.  An :class:`IntRow` holds an integer direction ``c``
and stands for the unit vector ``c / sqrt(N)`` with ``N = sum(c_j**2)``; all
exact work happens on these.  A :class:`FloatRow` holds a unit vector of
doubles.  A matrix never mixes the two kinds.

Hypercube vertices are n-bit masks: bit ``j`` set means coordinate ``j`` is
``+1``, clear means ``-1``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import MatrixFormatError

__all__ = [
    "IntRow",
    "FloatRow",
    "ZeroRow",
    "ZERO_ROW",
    "CanonicalRow",
    "Matrix",
    "row_from_subset",
    "canonical_row",
    "parse_matrix",
    "serialize_matrix",
    "load_matrix",
    "vertex_vector",
    "vertex_mask",
    "all_vertices",
    "UNIT_TOL",
    "RENORMALIZE_TOL",
]

UNIT_TOL = 1e-9
RENORMALIZE_TOL = 1e-6


@dataclass(frozen=True)
class IntRow:
    c: tuple[int, ...]
    N: int = field(init=False, compare=False)

    def __post_init__(self):
        c = tuple(int(v) for v in self.c)
        object.__setattr__(self, "c", c)
        N = sum(v * v for v in c)
        if N == 0:
            raise ValueError("IntRow must be nonzero")
        object.__setattr__(self, "N", N)

    def __len__(self) -> int:
        return len(self.c)

    def entries(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float) / math.sqrt(self.N)

    def entry_squares(self) -> tuple[Fraction, ...]:
        """Exact squared entries ``c_j**2 / N``; they sum to 1."""
        return tuple(Fraction(v * v, self.N) for v in self.c)


@dataclass(frozen=True)
class FloatRow:
    v: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))

    @classmethod
    def normalized(cls, values: Iterable[float]) -> FloatRow:
        arr = np.asarray(list(values), dtype=float)
        norm = float(np.linalg.norm(arr))
        if not norm > 0:
            raise ValueError("cannot normalize a zero row")
        return cls(tuple(arr / norm))

    def __len__(self) -> int:
        return len(self.v)

    def entries(self) -> np.ndarray:
        return np.asarray(self.v, dtype=float)


class ZeroRow:
    """Marker for a vertex subset whose sum vanishes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO_ROW"


ZERO_ROW = ZeroRow()

Row = Union[IntRow, FloatRow]


@dataclass(frozen=True, order=True)
class CanonicalRow:
    """Primitive integer direction with a positive first nonzero entry."""

    p: tuple[int, ...]

    @property
    def N(self) -> int:
        return sum(v * v for v in self.p)

    def as_introw(self) -> IntRow:
        return IntRow(self.p)


def canonical_row(r: IntRow | Sequence[int]) -> CanonicalRow:
    if isinstance(r, ZeroRow):
        raise ValueError("zero row has no direction")
    c = r.c if isinstance(r, IntRow) else tuple(int(v) for v in r)
    g = reduce(math.gcd, (abs(v) for v in c), 0)
    if g == 0:
        raise ValueError("zero row has no direction")
    p = [v // g for v in c]
    first = next(v for v in p if v != 0)
    if first < 0:
        p = [-v for v in p]
    return CanonicalRow(tuple(p))


def vertex_vector(mask: int, n: int) -> tuple[int, ...]:
    return tuple(1 if (mask >> j) & 1 else -1 for j in range(n))


def vertex_mask(x: Sequence[int]) -> int:
    mask = 0
    for j, v in enumerate(x):
        if v == 1:
            mask |= 1 << j
        elif v != -1:
            raise ValueError(f"not a hypercube vertex: {tuple(x)}")
    return mask


def all_vertices(n: int, dtype=np.int64) -> np.ndarray:
    """All ``2**n`` vertices as rows, row ``t`` being the vertex with mask ``t``."""
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(dtype)


def row_from_subset(V: Iterable[Sequence[int] | int], n: int | None = None) -> IntRow | ZeroRow:
    """Sum of the given vertices as an :class:`IntRow`, or ``ZERO_ROW``.

    Vertices may be ±1 sequences or bitmasks (the latter need ``n``).
    """
    total: list[int] | None = None if n is None else [0] * n
    for x in V:
        if isinstance(x, (int, np.integer)):
            if n is None:
                raise ValueError("bitmask vertices need n")
            x = vertex_vector(int(x), n)
        if total is None:
            total = [0] * len(x)
        if len(x) != len(total) or any(v not in (1, -1) for v in x):
            raise ValueError(f"not a vertex of the {len(total)}-cube: {tuple(x)}")
        for j, v in enumerate(x):
            total[j] += v
    if total is None or not any(total):
        return ZERO_ROW
    return IntRow(tuple(total))


@dataclass(frozen=True)
class Matrix:
    rows: tuple[Row, ...]
    label: str | None = None

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise MatrixFormatError("empty matrix")
        kinds = {type(r) for r in rows}
        if len(kinds) != 1 or not kinds <= {IntRow, FloatRow}:
            raise MatrixFormatError("rows must be all IntRow or all FloatRow")
        n = len(rows[0])
        if n < 1 or any(len(r) != n for r in rows):
            raise MatrixFormatError("all rows must have the same positive length")

    @classmethod
    def from_int(cls, rows: Iterable[Sequence[int]], label: str | None = None) -> Matrix:
        return cls(tuple(IntRow(tuple(r)) for r in rows), label)

    @classmethod
    def from_float(cls, rows, label: str | None = None, normalize: bool = True) -> Matrix:
        if normalize:
            return cls(tuple(FloatRow.normalized(r) for r in rows), label)
        return cls(tuple(FloatRow(tuple(r)) for r in rows), label)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def is_int(self) -> bool:
        return isinstance(self.rows[0], IntRow)

    def int_array(self) -> np.ndarray:
        """Integer directions; object dtype when entries exceed int64."""
        if not self.is_int:
            raise TypeError("matrix has float rows")
        data = [r.c for r in self.rows]
        big = max(abs(v) for r in data for v in r)
        return np.array(data, dtype=object if big >= 2**62 else np.int64)

    def norms_sq(self) -> tuple[int, ...]:
        if not self.is_int:
            raise TypeError("matrix has float rows")
        return tuple(r.N for r in self.rows)

    def to_array(self) -> np.ndarray:
        """Unit-row float matrix."""
        return np.vstack([r.entries() for r in self.rows])

    def frobenius_sq(self) -> Fraction | float:
        """Sum of squared entries: exactly ``m`` for integer-direction rows."""
        if self.is_int:
            return sum((sum(r.entry_squares(), Fraction(0)) for r in self.rows), Fraction(0))
        return float(np.sum(self.to_array() ** 2))

    def with_label(self, label: str | None) -> Matrix:
        return Matrix(self.rows, label)

    def transform(self, row_perm=None, row_signs=None, col_perm=None, col_signs=None) -> Matrix:
        """Permute and negate rows and columns (a symmetry of the objective)."""
        m, n = self.shape
        row_perm = list(range(m)) if row_perm is None else list(row_perm)
        col_perm = list(range(n)) if col_perm is None else list(col_perm)
        row_signs = [1] * m if row_signs is None else list(row_signs)
        col_signs = [1] * n if col_signs is None else list(col_signs)
        out = []
        for i in row_perm:
            vals = self.rows[i].c if self.is_int else self.rows[i].v
            new = [row_signs[i] * col_signs[j] * vals[j] for j in col_perm]
            out.append(IntRow(tuple(new)) if self.is_int else FloatRow(tuple(new)))
        return Matrix(tuple(out), self.label)

    def __str__(self) -> str:
        lines = []
        for r in self.rows:
            if isinstance(r, IntRow):
                body = " ".join(f"{v:3d}" for v in r.c)
                lines.append(f"[{body} ] / sqrt({r.N})")
            else:
                lines.append("[" + " ".join(f"{v: .6f}" for v in r.v) + " ]")
        return "\n".join(lines)


def _check_unit(values: list[float], idx: int) -> FloatRow:
    norm = math.sqrt(math.fsum(v * v for v in values))
    dev = abs(norm - 1.0)
    if dev <= UNIT_TOL:
        return FloatRow(tuple(values))
    if dev <= RENORMALIZE_TOL:
        warnings.warn(f"row {idx} has norm {norm!r}; renormalizing", stacklevel=3)
        return FloatRow.normalized(values)
    raise MatrixFormatError(f"row {idx} has norm {norm!r}, not a unit vector")


def _number(x, idx: int, integer: bool):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise MatrixFormatError(f"row {idx}: non-numeric entry {x!r}")
    if integer and not isinstance(x, int):
        if isinstance(x, float) and x.is_integer():
            return int(x)
        raise MatrixFormatError(f"row {idx}: int_vec entry {x!r} is not an integer")
    if not integer and not math.isfinite(x):
        raise MatrixFormatError(f"row {idx}: non-finite entry {x!r}")
    return x


def matrix_from_obj(obj, normalize: bool = False) -> Matrix:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise MatrixFormatError("matrix JSON must be an object with a 'rows' list")
    rows_in = obj["rows"]
    if not isinstance(rows_in, list) or not rows_in:
        raise MatrixFormatError("empty matrix")
    rows: list[Row] = []
    for idx, item in enumerate(rows_in):
        if not isinstance(item, dict) or len(item) != 1:
            raise MatrixFormatError(f"row {idx}: expected {{'int_vec': ...}} or {{'float_vec': ...}}")
        (kind, vec), = item.items()
        if kind not in ("int_vec", "float_vec") or not isinstance(vec, list) or not vec:
            raise MatrixFormatError(f"row {idx}: bad row entry {item!r}")
        if kind == "int_vec":
            vals = [_number(x, idx, True) for x in vec]
            if not any(vals):
                raise MatrixFormatError(f"row {idx}: zero row")
            rows.append(IntRow(tuple(vals)))
        else:
            vals = [float(_number(x, idx, False)) for x in vec]
            if normalize:
                try:
                    rows.append(FloatRow.normalized(vals))
                except ValueError as exc:
                    raise MatrixFormatError(f"row {idx}: {exc}") from None
            else:
                rows.append(_check_unit(vals, idx))
    if len({type(r) for r in rows}) != 1:
        raise MatrixFormatError("mixed int_vec and float_vec rows")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise MatrixFormatError("rows have different lengths")
    if "m" in obj and obj["m"] != len(rows):
        raise MatrixFormatError(f"declared m={obj['m']} but found {len(rows)} rows")
    if "n" in obj and obj["n"] != n:
        raise MatrixFormatError(f"declared n={obj['n']} but rows have length {n}")
    return Matrix(tuple(rows), obj.get("label"))


def parse_matrix(text: str, normalize: bool = False) -> Matrix:
    """Parse the JSON matrix format.

    Float rows within 1e-9 of unit length are kept verbatim, rows within 1e-6
    are renormalized with a warning, anything else is rejected unless
    ``normalize`` is set.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"invalid JSON: {exc}") from None
    return matrix_from_obj(obj, normalize=normalize)


def matrix_to_obj(A: Matrix) -> dict:
    obj: dict = {"m": A.m, "n": A.n}
    if A.label is not None:
        obj["label"] = A.label
    if A.is_int:
        obj["rows"] = [{"int_vec": list(r.c)} for r in A.rows]
    else:
        obj["rows"] = [{"float_vec": list(r.v)} for r in A.rows]
    return obj


def serialize_matrix(A: Matrix) -> str:
    return json.dumps(matrix_to_obj(A))


def load_matrix(path, normalize: bool = False) -> Matrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), normalize=normalize)
