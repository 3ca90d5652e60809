"""Objective evaluation by full hypercube enumeration.

``beta(A) = 2**-n * sum_x ||A x||_inf`` over ``x in {-1, 1}^n``.

Two engines share the Gray-code kernels in :mod:`badsci._kernels`:

* :func:`beta_exact` works on integer-direction rows and returns a
  :class:`~badsci.surd.SurdValue`.  Winners are decided by the integer test
  ``(c_i.x)^2 N_j`` vs ``(c_j.x)^2 N_i`` and the hot loop only accumulates,
  per row, the integer sum of winning ``|c.x|``.
* :func:`beta_float` works on any unit-row matrix.  Every double is a dyadic
  rational, so the rows are scaled by a common power of two to int64 and the
  dot products are tracked exactly; the averaged maximum is an exact rational
  rounded once at the end.  The result is therefore independent of
  enumeration order and thread count, and equals :func:`beta_naive` bit for
  bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionCapExceeded
from .matrix import Matrix, all_vertices
from .surd import SurdValue, canonicalize, sqrt_rational, surd_sum

__all__ = [
    "DIMENSION_CAP",
    "BetaResult",
    "HistogramEntry",
    "PartitionReport",
    "beta",
    "beta_exact",
    "beta_float",
    "beta_naive",
    "partition",
    "lp_beta",
    "khintchine_bound",
    "fixed_point_scale",
]

DIMENSION_CAP = 30
_I64_SAFE = 1 << 62


@dataclass(frozen=True)
class BetaResult:
    approx: float
    engine: str
    vertex_count: int
    exact: SurdValue | None = None

    def to_json(self) -> dict:
        out: dict = {"approx": self.approx, "engine": self.engine, "vertex_count": self.vertex_count}
        if self.exact is not None:
            out["beta"] = self.exact.to_json()
        return out


@dataclass(frozen=True)
class HistogramEntry:
    value_approx: float
    count: int
    value: SurdValue | None = None

    def to_json(self) -> dict:
        out: dict = {"value_approx": self.value_approx, "count": self.count}
        if self.value is not None:
            out["value_terms"] = self.value.to_json()["terms"]
        return out


@dataclass
class PartitionReport:
    """Vertex sets ``W_i`` (bitmasks), histogram of attained maxima, and beta."""

    n: int
    sets: list[np.ndarray]
    histogram: list[HistogramEntry]
    beta: BetaResult
    row_sums: list = field(default_factory=list)

    def sizes(self) -> list[int]:
        return [len(s) for s in self.sets]

    def histogram_dict(self) -> dict:
        return {(e.value if e.value is not None else e.value_approx): e.count for e in self.histogram}

    def to_json(self, with_sets: bool = False) -> dict:
        out = self.beta.to_json()
        out["histogram"] = [e.to_json() for e in self.histogram]
        out["set_sizes"] = self.sizes()
        if with_sets:
            out["sets"] = [s.tolist() for s in self.sets]
        return out


def _check_dim(n: int, cap: int | None) -> None:
    cap = DIMENSION_CAP if cap is None else cap
    if n > cap:
        raise DimensionCapExceeded(f"n={n} exceeds the enumeration cap {cap}")


def _ranges(n: int, threads: int) -> list[tuple[int, int]]:
    half = 1 << (n - 1)
    parts = max(1, min(int(threads), half))
    bounds = [half * k // parts for k in range(parts + 1)]
    return [(bounds[k], bounds[k + 1]) for k in range(parts) if bounds[k] < bounds[k + 1]]


def _run(fn, ranges, threads: int):
    if threads <= 1 or len(ranges) == 1:
        return [fn(t0, t1) for t0, t1 in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


# integer-direction engine


def _introw_fits(C: np.ndarray, N: Sequence[int], n: int) -> bool:
    if C.dtype == object:
        return False
    l1 = int(np.abs(C).sum(axis=1).max())
    return l1 * l1 * max(N) < _I64_SAFE and (l1 << n) < _I64_SAFE


def _introw_sums_py(C, N, n) -> list[int]:
    rows = [[int(v) for v in r] for r in C]
    m = len(rows)
    S = [0] * m
    for g in range(1 << (n - 1)):
        best_i, best_d = 0, None
        for i, c in enumerate(rows):
            d = sum(cj if (g >> j) & 1 else -cj for j, cj in enumerate(c))
            if best_d is None or d * d * N[best_i] > best_d * best_d * N[i]:
                best_i, best_d = i, d
        S[best_i] += abs(best_d)
    return S


def _beta_from_row_sums(S: Sequence[int], N: Sequence[int], n: int) -> SurdValue:
    # beta = 2/2^n * sum_i S_i / sqrt(N_i) = sum_i (S_i / (2^(n-1) N_i)) sqrt(N_i)
    half = 1 << (n - 1)
    return surd_sum(canonicalize(Fraction(int(s), half * int(Ni)), int(Ni)) for s, Ni in zip(S, N) if s)


def beta_exact(A: Matrix, threads: int = 1, cap: int | None = None) -> BetaResult:
    """Exact beta of an integer-direction matrix."""
    if not A.is_int:
        raise TypeError("beta_exact needs integer-direction rows; use beta_float")
    n = A.n
    _check_dim(n, cap)
    C = A.int_array()
    N = A.norms_sq()
    if _introw_fits(C, N, n):
        Narr = np.asarray(N, dtype=np.int64)
        parts = _run(lambda t0, t1: _kernels.introw_sums(C, Narr, n, t0, t1), _ranges(n, threads), threads)
        S = [int(v) for v in np.sum(parts, axis=0)]
    else:
        S = _introw_sums_py(C, N, n)
    value = _beta_from_row_sums(S, N, n)
    return BetaResult(approx=float(value), engine="exact", vertex_count=1 << n, exact=value)


# fixed-point float engine


def fixed_point_scale(arr: np.ndarray) -> tuple[list[list[int]], int]:
    """Exact integers ``M`` and exponent ``E`` with ``arr == M * 2**E``."""
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    mant, ex = np.frexp(arr)
    im = (mant * float(1 << 53)).astype(np.int64)
    ex = ex.astype(np.int64) - 53
    nz = im != 0
    if not nz.any():
        return [[0] * arr.shape[1] for _ in range(arr.shape[0])], 0
    # lowest set bit of each mantissa
    low = np.zeros_like(im)
    low[nz] = np.log2((np.abs(im[nz]) & -np.abs(im[nz])).astype(float)).astype(np.int64)
    im = im >> low
    ex = ex + low
    E = int(ex[nz].min())
    M = [[int(v) << int(e - E) if v else 0 for v, e in zip(rv, re)] for rv, re in zip(im, ex)]
    return M, E


def _fixed_array(M: list[list[int]]) -> np.ndarray | None:
    l1 = max(sum(abs(v) for v in row) for row in M)
    if l1 >= _I64_SAFE:
        return None
    return np.array(M, dtype=np.int64)


def _fixed_total_py(M, n) -> int:
    total = 0
    for g in range(1 << (n - 1)):
        best = 0
        for row in M:
            d = abs(sum(v if (g >> j) & 1 else -v for j, v in enumerate(row)))
            if d > best:
                best = d
        total += best
    return total


def _dyadic_to_float(num: int, E: int, shift: int) -> float:
    # num * 2**E / 2**shift, rounded once
    e = E - shift
    return float(Fraction(num * (1 << e)) if e >= 0 else Fraction(num, 1 << -e))


def beta_float(A: Matrix | np.ndarray, threads: int = 1, cap: int | None = None) -> BetaResult:
    """Double-precision beta, correctly rounded from the exact average."""
    arr = A.to_array() if isinstance(A, Matrix) else np.asarray(A, dtype=float)
    n = arr.shape[1]
    _check_dim(n, cap)
    M, E = fixed_point_scale(arr)
    Marr = _fixed_array(M)
    if Marr is not None:
        parts = _run(lambda t0, t1: _kernels.fixed_total(Marr, n, t0, t1), _ranges(n, threads), threads)
        total = sum((int(hi) << 62) + int(lo) for hi, lo in parts)
    else:
        total = _fixed_total_py(M, n)
    return BetaResult(approx=_dyadic_to_float(total, E, n - 1), engine="float", vertex_count=1 << n)


def beta_naive(A: Matrix | np.ndarray, cap: int | None = 20) -> BetaResult:
    """Reference engine: every vertex of the full cube, every dot product from scratch.

    Exact for integer-direction matrices, correctly rounded otherwise.
    """
    if isinstance(A, Matrix) and A.is_int:
        n = A.n
        _check_dim(n, cap)
        X = all_vertices(n, dtype=object)
        C = np.array([r.c for r in A.rows], dtype=object)
        N = A.norms_sq()
        D = X.dot(C.T)
        S = [0] * A.m
        for row in D:
            w = 0
            for i in range(1, len(row)):
                if row[i] * row[i] * N[w] > row[w] * row[w] * N[i]:
                    w = i
            S[w] += abs(row[w])
        value = surd_sum(canonicalize(Fraction(s, (1 << n) * Ni), Ni) for s, Ni in zip(S, N) if s)
        return BetaResult(approx=float(value), engine="exact", vertex_count=1 << n, exact=value)
    arr = A.to_array() if isinstance(A, Matrix) else np.asarray(A, dtype=float)
    n = arr.shape[1]
    _check_dim(n, cap)
    M, E = fixed_point_scale(arr)
    Marr = _fixed_array(M)
    if Marr is not None:
        D = all_vertices(n) @ Marr.T
        total = sum(int(v) for v in np.abs(D).max(axis=1))
    else:
        D = all_vertices(n, dtype=object).dot(np.array(M, dtype=object).T)
        total = sum(max(abs(v) for v in row) for row in D)
    return BetaResult(approx=_dyadic_to_float(total, E, n), engine="float", vertex_count=1 << n)


def beta(A: Matrix, engine: str = "auto", threads: int = 1, cap: int | None = None) -> BetaResult:
    if engine == "auto":
        engine = "exact" if A.is_int else "float"
    if engine == "exact":
        return beta_exact(A, threads=threads, cap=cap)
    if engine == "float":
        return beta_float(A, threads=threads, cap=cap)
    raise ValueError(f"unknown engine {engine!r}")


# partition


def _half_winners(A: Matrix, threads: int, cap: int | None):
    n = A.n
    _check_dim(n, cap)
    half = 1 << (n - 1)
    winner = np.empty(half, dtype=np.int64)
    if A.is_int:
        C = A.int_array()
        N = A.norms_sq()
        if _introw_fits(C, N, n):
            absdot = np.empty(half, dtype=np.int64)
            Narr = np.asarray(N, dtype=np.int64)
            _run(lambda t0, t1: _kernels.introw_partition(C, Narr, n, t0, t1, winner, absdot), _ranges(n, threads), threads)
            return winner, absdot, None
        M, E = C.tolist(), None
    else:
        M, E = fixed_point_scale(A.to_array())
        Marr = _fixed_array(M)
        if Marr is not None:
            absdot = np.empty(half, dtype=np.int64)
            _run(lambda t0, t1: _kernels.fixed_partition(Marr, n, t0, t1, winner, absdot), _ranges(n, threads), threads)
            return winner, absdot, E
    # arbitrary-precision fallback
    N = A.norms_sq() if A.is_int else None
    absdot = np.empty(half, dtype=object)
    for g in range(half):
        best_i, best_d = 0, None
        for i, row in enumerate(M):
            d = abs(sum(v if (g >> j) & 1 else -v for j, v in enumerate(row)))
            if best_d is None or (
                d * d * N[best_i] > best_d * best_d * N[i] if N is not None else d > best_d
            ):
                best_i, best_d = i, d
        winner[g] = best_i
        absdot[g] = best_d
    return winner, absdot, E


def partition(A: Matrix, threads: int = 1, cap: int | None = None) -> PartitionReport:
    """Split the cube into ``W_i`` (smallest index wins ties) and histogram the maxima."""
    n, m = A.n, A.m
    winner, absdot, E = _half_winners(A, threads, cap)
    half = 1 << (n - 1)
    full = (1 << n) - 1
    g = np.arange(half, dtype=np.int64)
    sets = []
    row_sums = []
    for i in range(m):
        sel = g[winner == i]
        sets.append(np.sort(np.concatenate([sel, sel ^ full])))
        row_sums.append(sum(int(v) for v in absdot[winner == i]))
    hist: dict = {}
    if A.is_int:
        N = A.norms_sq()
        for i in range(m):
            vals, counts = np.unique(absdot[winner == i], return_counts=True)
            for v, c in zip(vals, counts):
                key = Fraction(int(v) * int(v), N[i])
                hist[key] = hist.get(key, 0) + 2 * int(c)
        entries = []
        for key in sorted(hist):
            val = sqrt_rational(key)
            entries.append(HistogramEntry(value_approx=float(val), count=hist[key], value=val))
        value = _beta_from_row_sums(row_sums, N, n)
        result = BetaResult(approx=float(value), engine="exact", vertex_count=1 << n, exact=value)
    else:
        vals, counts = np.unique(absdot, return_counts=True)
        entries = [
            HistogramEntry(value_approx=_dyadic_to_float(int(v), E, 0), count=2 * int(c))
            for v, c in zip(vals, counts)
        ]
        total = sum(row_sums)
        result = BetaResult(approx=_dyadic_to_float(total, E, n - 1), engine="float", vertex_count=1 << n)
        row_sums = [_dyadic_to_float(s, E, -1) for s in row_sums]
    if A.is_int:
        # sum over W_i of |a_i.x| as exact surds
        row_sums = [canonicalize(Fraction(2 * s, Ni), Ni) for s, Ni in zip(row_sums, A.norms_sq())]
    return PartitionReport(n=n, sets=sets, histogram=entries, beta=result, row_sums=row_sums)


# l^p variants


def _half_vertices(n: int, start: int, stop: int) -> np.ndarray:
    masks = np.arange(start, stop, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(float)


def lp_beta(A: Matrix | np.ndarray, p: float, cap: int | None = None, chunk: int = 1 << 15) -> float:
    """``2**-n * sum_x ||A x||_p`` in double precision; ``p = inf`` is :func:`beta_float`."""
    if p is None or p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p!r}")
    if math.isinf(p):
        return beta_float(A, cap=cap).approx
    arr = A.to_array() if isinstance(A, Matrix) else np.asarray(A, dtype=float)
    n = arr.shape[1]
    _check_dim(n, cap)
    half = 1 << (n - 1)
    partial = []
    for start in range(0, half, chunk):
        Y = np.abs(_half_vertices(n, start, min(half, start + chunk)) @ arr.T)
        if p == 1:
            norms = Y.sum(axis=1)
        elif p == 2:
            norms = np.sqrt((Y * Y).sum(axis=1))
        else:
            norms = np.power(np.power(Y, p).sum(axis=1), 1.0 / p)
        partial.extend(norms.tolist())
    return math.fsum(partial) / half


def khintchine_bound(n: int, p: float) -> float:
    """``(n * 2**(p/2) * Gamma(p/2 + 1)) ** (1/p)``, an upper bound on the l^p average for p > 2."""
    if not p > 2:
        raise ValueError(f"the moment bound needs p > 2, got {p!r}")
    return _khintchine_expr(n, p)


def _khintchine_expr(n: int, p: float) -> float:
    return math.exp((math.log(n) + 0.5 * p * math.log(2.0) + math.lgamma(0.5 * p + 1.0)) / p)
