r"""Exact arithmetic for quadratic-irrational character values.

Character values are stored as triples (a, b, d) denoting (a + b*sqrt(d))/2
with d squarefree (negative d means b*i*sqrt(|d|)).  Orthogonality checks
multiply values from different quadratic fields, so sums are accumulated in
QExact, a multi-quadratic number: a finite Fraction-linear combination of
sqrt(s) over squarefree integers s (s = 1 is the rational part).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def squarefree_decompose(m: int) -> tuple[int, int]:
    """m = k^2 * s with s squarefree; returns (k, s).  Requires m >= 1."""
    if m < 1:
        raise ValueError("positive argument required")
    k, s, f = 1, 1, 2
    while f * f <= m:
        e = 0
        while m % f == 0:
            m //= f
            e += 1
        k *= f ** (e // 2)
        if e % 2:
            s *= f
        f += 1
    return k, s * m


def is_squarefree(d: int) -> bool:
    if d == 0:
        return False
    return squarefree_decompose(abs(d))[0] == 1


@dataclass(frozen=True)
class QuadraticValue:
    """(a + b*sqrt(d))/2 with a, b integers and d squarefree."""

    a: int
    b: int
    d: int = 1

    def __post_init__(self) -> None:
        if not is_squarefree(self.d):
            raise ValueError(f"d = {self.d} is not squarefree")
        if self.d == 1 and self.b != 0:
            raise ValueError("d = 1 requires b = 0")
        if self.b == 0 and self.d != 1:
            raise ValueError("b = 0 requires d = 1")

    @classmethod
    def integer(cls, v: int) -> "QuadraticValue":
        return cls(2 * v, 0, 1)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("value is irrational")
        return Fraction(self.a, 2)

    def conjugate(self) -> "QuadraticValue":
        """Complex conjugate; the identity on real (d > 0) values."""
        if self.d < 0:
            return QuadraticValue(self.a, -self.b, self.d)
        return self

    def exact(self) -> "QExact":
        terms = {1: Fraction(self.a, 2)}
        if self.b:
            terms[self.d] = Fraction(self.b, 2)
        return QExact(terms)

    def to_complex(self) -> complex:
        root = math.sqrt(abs(self.d))
        if self.d < 0:
            return complex(self.a / 2, self.b * root / 2)
        return complex((self.a + self.b * root) / 2, 0.0)


class QExact:
    """Exact element of the compositum of quadratic fields.

    Represented as {s: coeff} with s squarefree, value sum coeff * sqrt(s),
    where sqrt(s) = i*sqrt(|s|) for s < 0.  Zero coefficients are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms: dict[int, Fraction] = {}
        if terms:
            for s, c in terms.items():
                if c:
                    self.terms[s] = Fraction(c)

    @classmethod
    def rational(cls, v) -> "QExact":
        return cls({1: Fraction(v)})

    def __add__(self, other: "QExact") -> "QExact":
        out = dict(self.terms)
        for s, c in other.terms.items():
            acc = out.get(s, Fraction(0)) + c
            if acc:
                out[s] = acc
            else:
                out.pop(s, None)
        res = QExact()
        res.terms = out
        return res

    def __sub__(self, other: "QExact") -> "QExact":
        return self + other.scale(-1)

    def scale(self, k) -> "QExact":
        k = Fraction(k)
        return QExact({s: c * k for s, c in self.terms.items()})

    def __mul__(self, other: "QExact") -> "QExact":
        out: dict[int, Fraction] = {}
        for s1, c1 in self.terms.items():
            for s2, c2 in other.terms.items():
                coeff, s = _mul_roots(s1, s2)
                acc = out.get(s, Fraction(0)) + c1 * c2 * coeff
                if acc:
                    out[s] = acc
                else:
                    out.pop(s, None)
        res = QExact()
        res.terms = out
        return res

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return all(s == 1 for s in self.terms)

    def rational_part(self) -> Fraction:
        return self.terms.get(1, Fraction(0))

    def irrational_part(self) -> "QExact":
        return QExact({s: c for s, c in self.terms.items() if s != 1})

    def __eq__(self, other) -> bool:
        if isinstance(other, QExact):
            return self.terms == other.terms
        return self.is_rational and self.rational_part() == Fraction(other)

    def __repr__(self) -> str:
        if not self.terms:
            return "QExact(0)"
        bits = [f"{c}*sqrt({s})" if s != 1 else str(c) for s, c in sorted(self.terms.items())]
        return "QExact(" + " + ".join(bits) + ")"


def _mul_roots(s1: int, s2: int) -> tuple[int, int]:
    """sqrt(s1)*sqrt(s2) = coeff * sqrt(s); returns (coeff, s)."""
    if s1 == s2:
        return s1, 1
    sign = -1 if (s1 < 0 and s2 < 0) else 1
    prod = abs(s1 * s2)
    k, sf = squarefree_decompose(prod)
    if (s1 < 0) != (s2 < 0):
        sf = -sf
    return sign * k, sf
