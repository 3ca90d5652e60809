"""Exact arithmetic on finite rational combinations of square roots.

A :class:`SurdValue` stores ``sum(q_d * sqrt(d))`` with squarefree ``d >= 1``
and nonzero rational ``q_d``.  Square roots of distinct squarefree integers
are linearly independent over the rationals, so the term map is a canonical
form: two values are equal iff their maps are identical.  Strict order is
decided by interval evaluation with integer square roots at doubling
precision.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from numbers import Rational
from typing import Iterable, Mapping

__all__ = [
    "PrecisionExhausted",
    "SurdValue",
    "canonicalize",
    "compare",
    "squarefree_split",
    "sqrt_rational",
    "PRECISION_LADDER",
    "DEFAULT_PRECISION_CAP",
]

PRECISION_LADDER = (64, 128, 256, 1024)
DEFAULT_PRECISION_CAP = 4096
_ENV_CAP = "BADSCI_PRECISION_CAP"


class PrecisionExhausted(ArithmeticError):
    """Interval evaluation did not separate two distinct values before the cap."""


def precision_cap() -> int:
    raw = os.environ.get(_ENV_CAP)
    if not raw:
        return DEFAULT_PRECISION_CAP
    cap = int(raw)
    if cap < 64:
        raise ValueError(f"{_ENV_CAP} must be >= 64, got {cap}")
    return cap


_TRIAL_LIMIT = 1 << 14


@lru_cache(maxsize=4096)
def squarefree_split(d: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``d == s*s*r`` and ``r`` squarefree.

    Trial division by small primes, then sympy's factorizer for whatever
    cofactor is left over.
    """
    if d < 0:
        raise ValueError("radicand must be nonnegative")
    if d == 0:
        return 0, 0
    s, r = 1, 1
    rest = d
    p = 2
    while p <= _TRIAL_LIMIT and p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    if rest > 1 and p * p <= rest:
        from sympy import factorint

        for q, e in factorint(rest).items():
            q, e = int(q), int(e)
            s *= q ** (e // 2)
            if e % 2:
                r *= q
        rest = 1
    r *= rest
    return s, r


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected a rational, got {type(x).__name__}")


class SurdValue:
    """Immutable exact value ``sum(q_d * sqrt(d))``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        acc: dict[int, Fraction] = {}
        for d, q in (terms or {}).items():
            d = int(d)
            q = _as_fraction(q)
            if q == 0 or d == 0:
                continue
            s, r = squarefree_split(d)
            acc[r] = acc.get(r, Fraction(0)) + q * s
        self._terms = {d: acc[d] for d in sorted(acc) if acc[d] != 0}
        self._hash = None

    # construction helpers
    @classmethod
    def rational(cls, q) -> SurdValue:
        return cls({1: q})

    @classmethod
    def sqrt(cls, d) -> SurdValue:
        return sqrt_rational(d)

    @classmethod
    def zero(cls) -> SurdValue:
        return cls()

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    # arithmetic
    def __add__(self, other) -> SurdValue:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self._terms)
        for d, q in other._terms.items():
            acc[d] = acc.get(d, Fraction(0)) + q
        return _from_canonical(acc)

    __radd__ = __add__

    def __neg__(self) -> SurdValue:
        return _from_canonical({d: -q for d, q in self._terms.items()})

    def __pos__(self) -> SurdValue:
        return self

    def __sub__(self, other) -> SurdValue:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> SurdValue:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, r) -> SurdValue:
        r = _as_fraction(r)
        if r == 0:
            return SurdValue()
        return _from_canonical({d: q * r for d, q in self._terms.items()})

    def __mul__(self, other) -> SurdValue:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = _coerce(other)
        if other is None:
            return NotImplemented
        acc: dict[int, Fraction] = {}
        for d1, q1 in self._terms.items():
            for d2, q2 in other._terms.items():
                g = gcd(d1, d2)
                # sqrt(d1*d2) = g * sqrt(d1*d2/g^2), product of squarefree is squarefree after removing g^2
                r = (d1 // g) * (d2 // g)
                acc[r] = acc.get(r, Fraction(0)) + q1 * q2 * g
        return _from_canonical(acc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> SurdValue:
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / _as_fraction(other))
        return NotImplemented

    # ordering
    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __lt__(self, other) -> bool:
        return compare(self, _coerce_strict(other)) < 0

    def __le__(self, other) -> bool:
        return compare(self, _coerce_strict(other)) <= 0

    def __gt__(self, other) -> bool:
        return compare(self, _coerce_strict(other)) > 0

    def __ge__(self, other) -> bool:
        return compare(self, _coerce_strict(other)) >= 0

    def sign(self, cap: int | None = None) -> int:
        return _sign(self._terms, cap)

    def __abs__(self) -> SurdValue:
        return -self if self.sign() < 0 else self

    # numerics
    def bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational enclosure ``lo <= value <= hi`` of width O(2**-bits)."""
        lo, hi, den = _enclose(self._terms, bits)
        return Fraction(lo, den), Fraction(hi, den)

    def __float__(self) -> float:
        if not self._terms:
            return 0.0
        lo, hi = self.bounds(96)
        return float((lo + hi) / 2)

    @property
    def approx(self) -> float:
        return float(self)

    # serialization
    def to_text(self) -> str:
        """``d:num/den`` pairs separated by spaces, radicands increasing."""
        return " ".join(f"{d}:{q.numerator}/{q.denominator}" for d, q in self._terms.items())

    @classmethod
    def from_text(cls, text: str) -> SurdValue:
        terms = {}
        for tok in text.split():
            d, q = tok.split(":")
            terms[int(d)] = Fraction(q)
        return cls(terms)

    def to_json(self) -> dict:
        return {
            "terms": {str(d): f"{q.numerator}/{q.denominator}" for d, q in self._terms.items()},
            "approx": float(self),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> SurdValue:
        # "approx" is advisory and ignored
        terms = obj["terms"] if "terms" in obj else obj
        return cls({int(d): Fraction(q) for d, q in terms.items()})

    def pretty(self) -> str:
        """Human form such as ``1/2 + 3/4*sqrt(3)``."""
        if not self._terms:
            return "0"
        parts = []
        for d, q in self._terms.items():
            mag = abs(q)
            coeff = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if d == 1:
                body = coeff
            elif mag == 1:
                body = f"sqrt({d})"
            else:
                body = f"{coeff}*sqrt({d})"
            sign = "-" if q < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"SurdValue({self.pretty()})"

    __str__ = pretty


def _from_canonical(acc: Mapping[int, Fraction]) -> SurdValue:
    # keys already squarefree; skip re-factoring
    out = SurdValue.__new__(SurdValue)
    out._terms = {d: acc[d] for d in sorted(acc) if acc[d] != 0}
    out._hash = None
    return out


def _coerce(x) -> SurdValue | None:
    if isinstance(x, SurdValue):
        return x
    if isinstance(x, (int, Fraction)):
        return SurdValue.rational(x)
    return None


def _coerce_strict(x) -> SurdValue:
    out = _coerce(x)
    if out is None:
        raise TypeError(f"cannot compare SurdValue with {type(x).__name__}")
    return out


def canonicalize(coeff, radicand: int) -> SurdValue:
    """``coeff * sqrt(radicand)`` with the square part moved into the coefficient."""
    radicand = int(radicand)
    if radicand < 0:
        raise ValueError("radicand must be nonnegative")
    coeff = _as_fraction(coeff)
    if radicand == 0 or coeff == 0:
        return SurdValue()
    s, r = squarefree_split(radicand)
    return _from_canonical({r: coeff * s})


def sqrt_rational(x) -> SurdValue:
    """Exact ``sqrt(x)`` for a nonnegative rational ``x``."""
    x = _as_fraction(x)
    if x < 0:
        raise ValueError("negative argument")
    # sqrt(p/q) = sqrt(p*q)/q
    return canonicalize(Fraction(1, x.denominator), x.numerator * x.denominator)


def _enclose(terms: Mapping[int, Fraction], bits: int) -> tuple[int, int, int]:
    """Integer enclosure ``(lo, hi, den)`` of ``sum(q*sqrt(d))``."""
    if not terms:
        return 0, 0, 1
    L = 1
    for q in terms.values():
        L = L * q.denominator // gcd(L, q.denominator)
    scale = 1 << bits
    lo = hi = 0
    for d, q in terms.items():
        num = q.numerator * (L // q.denominator)
        if d == 1:
            lo += num * scale
            hi += num * scale
            continue
        s = isqrt(d << (2 * bits))  # s <= sqrt(d)*2^bits < s+1
        if num > 0:
            lo += num * s
            hi += num * (s + 1)
        else:
            lo += num * (s + 1)
            hi += num * s
    return lo, hi, L * scale


def _sign(terms: Mapping[int, Fraction], cap: int | None = None) -> int:
    if not terms:
        return 0
    if len(terms) == 1:
        (q,) = terms.values()
        return 1 if q > 0 else -1
    cap = precision_cap() if cap is None else cap
    bits = PRECISION_LADDER[0]
    ladder = list(PRECISION_LADDER)
    while True:
        lo, hi, _ = _enclose(terms, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if bits >= cap:
            raise PrecisionExhausted(
                f"could not separate value from zero at {bits} bits; raise {_ENV_CAP}"
            )
        nxt = [b for b in ladder if b > bits]
        bits = min(nxt[0] if nxt else bits * 2, cap)


def compare(a: SurdValue, b: SurdValue, cap: int | None = None) -> int:
    """Exact three-way comparison: -1, 0 or 1.

    Equality is canonical-form identity.  Otherwise the difference is enclosed
    at 64, 128, 256, 1024 bits and then doubling up to ``cap`` (default 4096,
    overridable by ``BADSCI_PRECISION_CAP``).
    """
    a = _coerce_strict(a)
    b = _coerce_strict(b)
    if a._terms == b._terms:
        return 0
    return _sign((a - b)._terms, cap)


def surd_sum(values: Iterable[SurdValue]) -> SurdValue:
    acc: dict[int, Fraction] = {}
    for v in values:
        for d, q in v._terms.items():
            acc[d] = acc.get(d, Fraction(0)) + q
    return _from_canonical(acc)
