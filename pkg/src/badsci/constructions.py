"""Explicit matrix families: lifting, Hadamard powers, balanced trees, known optima."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .evaluate import BetaResult
from .matrix import FloatRow, IntRow, Matrix, UNIT_TOL
from .surd import SurdValue, sqrt_rational

__all__ = [
    "lift",
    "lifted_beta",
    "hadamard_power",
    "TreeSpec",
    "tree_spec",
    "tree_matrix",
    "tree_beta_formula",
    "known_matrix",
    "KNOWN_NAMES",
    "random_pm_matrix",
    "random_unit_matrix",
]


def lifted_beta(beta_A: BetaResult) -> BetaResult:
    """Objective of ``lift(A)``: ``sqrt(beta(A)**2 + 1)``."""
    n2 = 2 * int(math.log2(beta_A.vertex_count)) if beta_A.vertex_count else 0
    if beta_A.exact is not None:
        sq = beta_A.exact * beta_A.exact
        if sq.is_rational():
            val = sqrt_rational(sq.terms.get(1, Fraction(0)) + 1)
            return BetaResult(approx=float(val), engine="exact", vertex_count=1 << n2, exact=val)
    b = beta_A.approx
    return BetaResult(approx=math.sqrt(b * b + 1.0), engine="float", vertex_count=1 << n2)


def lift(A: Matrix, beta_A: BetaResult) -> Matrix:
    """Block matrix ``[g A, s I; g A, -s I]`` with ``g = b/sqrt(b^2+1)``, ``s = 1/sqrt(b^2+1)``.

    The result is integer-direction whenever every ``b / sqrt(N_i)`` is
    rational, which holds along the Hadamard-power chain.
    """
    m, n = A.shape
    if m != n:
        raise ValueError(f"lift needs a square matrix, got {m}x{n}")
    if not A.is_int:
        norms = np.linalg.norm(A.to_array(), axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError("lift needs unit rows")
    label = f"lift({A.label})" if A.label else None

    if A.is_int and beta_A.exact is not None:
        ratios = []
        for r in A.rows:
            q = beta_A.exact * sqrt_rational(Fraction(1, r.N))
            if not q.is_rational():
                break
            ratios.append(q.terms.get(1, Fraction(0)))
        else:
            top, bottom = [], []
            for i, (r, q) in enumerate(zip(A.rows, ratios)):
                a, b = q.numerator, q.denominator
                left = [a * v for v in r.c]
                unit = [0] * n
                unit[i] = b
                top.append(IntRow(tuple(left + unit)))
                unit = [0] * n
                unit[i] = -b
                bottom.append(IntRow(tuple(left + unit)))
            return Matrix(tuple(top + bottom), label)

    b = float(beta_A.exact) if beta_A.exact is not None else float(beta_A.approx)
    g = b / math.sqrt(b * b + 1.0)
    s = 1.0 / math.sqrt(b * b + 1.0)
    arr = A.to_array()
    rows = []
    for sign in (1.0, -1.0):
        for i in range(n):
            unit = np.zeros(n)
            unit[i] = sign * s
            rows.append(FloatRow(tuple(np.concatenate([g * arr[i], unit]))))
    return Matrix(tuple(rows), label)


def hadamard_power(k: int) -> Matrix:
    """``k``-fold lift of the optimal 2x2 matrix: ``2**k`` rows with entries in ``{-1, 0, 1}``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    A = known_matrix("opt2")
    b = BetaResult(approx=math.sqrt(2), engine="exact", vertex_count=4, exact=SurdValue.sqrt(2))
    for _ in range(k - 1):
        A = lift(A, b)
        b = lifted_beta(b)
    return A.with_label(f"hadamard-power(k={k})")


@dataclass(frozen=True)
class TreeSpec:
    n: int
    k: int
    labels: tuple[tuple[int, ...], ...]

    @property
    def long_rows(self) -> int:
        return sum(1 for s in self.labels if len(s) == self.k + 2)

    def check(self) -> None:
        lengths = {len(s) for s in self.labels}
        assert lengths <= {self.k + 1, self.k + 2}
        expected = 0 if self.n == 1 << self.k else 2 * (self.n - (1 << self.k))
        assert self.long_rows == expected
        assert all(s[0] == 1 for s in self.labels)
        assert len(set(self.labels)) == self.n


def tree_spec(n: int) -> TreeSpec:
    """Label sequences of the balanced binary tree with ``n`` leaves, left to right.

    Left edges are -1, right edges +1, the edge into the root +1.  The tree is
    complete to depth ``k = floor(log2 n)``; its leftmost ``n - 2**k`` leaves
    are split once more.
    """
    if n < 2:
        raise ValueError("tree matrices need n >= 2")
    k = n.bit_length() - 1
    extra = n - (1 << k)
    labels = []
    for leaf in range(1 << k):
        path = tuple(1 if (leaf >> (k - 1 - j)) & 1 else -1 for j in range(k))
        if leaf < extra:
            labels.append((1,) + path + (-1,))
            labels.append((1,) + path + (1,))
        else:
            labels.append((1,) + path)
    spec = TreeSpec(n=n, k=k, labels=tuple(labels))
    spec.check()
    return spec


def tree_matrix(n: int) -> Matrix:
    if n > 30:
        raise ValueError("tree matrices are limited to n <= 30")
    spec = tree_spec(n)
    rows = [s + (0,) * (n - len(s)) for s in spec.labels]
    return Matrix.from_int(rows, label=f"tree(n={n})")


def tree_beta_formula(n: int) -> SurdValue:
    """Closed form of the tree matrix objective."""
    if n < 2:
        raise ValueError("n must be >= 2")
    k = n.bit_length() - 1
    if n == 1 << k:
        return SurdValue.sqrt(k + 1)
    r1 = SurdValue.sqrt(k + 1)
    r2 = SurdValue.sqrt(k + 2)
    return (r1 * 2 - r2) + (r2 - r1) * Fraction(n, 1 << k)


_S2 = math.sqrt(2.0)

_KNOWN = {
    "opt2": lambda: Matrix.from_int([(1, 1), (1, -1)], label="opt2"),
    "opt3": lambda: Matrix(
        (
            FloatRow((-0.5, -0.5, _S2 / 2)),
            FloatRow((-_S2 / 2, 0.0, _S2 / 2)),
            FloatRow((0.5, 0.5, _S2 / 2)),
        ),
        label="opt3",
    ),
    "opt4": lambda: Matrix.from_int(
        [(1, 1, 1, 0), (1, -1, -1, 0), (1, -1, 1, 0), (1, 1, -1, 0)], label="opt4"
    ),
    "best5": lambda: Matrix.from_int(
        [
            (1, 1, 0, 0, 1),
            (-1, 1, 0, 1, 0),
            (-1, 0, 0, -1, 1),
            (0, -1, 1, 1, 1),
            (0, 1, 1, -1, -1),
        ],
        label="best5",
    ),
}

KNOWN_NAMES = tuple(_KNOWN) + ("conj2xn",)


def _conj2xn(n: int) -> Matrix:
    if n < 2:
        raise ValueError("conj2xn needs n >= 2")
    zeros = (0,) * (n - 2)
    return Matrix.from_int([(1, 1) + zeros, (1, -1) + zeros], label=f"conj2xn({n})")


def known_matrix(name: str, n: int | None = None) -> Matrix:
    """Literal matrices: ``opt2``, ``opt3`` (float), ``opt4``, ``best5``, ``conj2xn(n)``."""
    m = re.fullmatch(r"conj2xn\((\d+)\)", name)
    if m:
        return _conj2xn(int(m.group(1)))
    if name == "conj2xn":
        if n is None:
            raise ValueError("conj2xn needs n")
        return _conj2xn(n)
    try:
        return _KNOWN[name]()
    except KeyError:
        raise KeyError(f"unknown matrix {name!r}; expected one of {', '.join(KNOWN_NAMES)}") from None


def random_pm_matrix(n: int, seed: int | None = None, m: int | None = None) -> Matrix:
    """Random sign matrix, rows ``c / sqrt(n)`` with ``c`` in ``{-1, 1}^n``."""
    if n > 30:
        raise ValueError("n must be <= 30")
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1, 1]), size=(m or n, n))
    return Matrix.from_int(signs.tolist(), label=f"random-pm(n={n}, seed={seed})")


def random_unit_matrix(m: int, n: int, seed: int | None = None) -> Matrix:
    """Gaussian rows normalized to unit length."""
    rng = np.random.default_rng(seed)
    return Matrix.from_float(rng.standard_normal((m, n)), label=f"random-unit({m}x{n}, seed={seed})")
