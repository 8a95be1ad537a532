"""Exact quadratic arithmetic."""

import math
from fractions import Fraction

import pytest

from moonmod.quadratic import (QExact, QuadraticValue, is_squarefree,
                               squarefree_decompose)


def test_squarefree_decompose():
    assert squarefree_decompose(1) == (1, 1)
    assert squarefree_decompose(12) == (2, 3)
    assert squarefree_decompose(49) == (7, 1)
    assert squarefree_decompose(360) == (6, 10)
    with pytest.raises(ValueError):
        squarefree_decompose(0)


def test_is_squarefree():
    assert is_squarefree(1) and is_squarefree(-7) and is_squarefree(15)
    assert not is_squarefree(4) and not is_squarefree(-12) and not is_squarefree(0)


def test_quadratic_value_invariants():
    with pytest.raises(ValueError):
        QuadraticValue(1, 1, 4)  # not squarefree
    with pytest.raises(ValueError):
        QuadraticValue(1, 1, 1)  # d = 1 needs b = 0
    with pytest.raises(ValueError):
        QuadraticValue(1, 0, 5)  # b = 0 needs d = 1
    v = QuadraticValue.integer(7)
    assert v.is_rational and v.as_fraction() == 7


def test_conjugate_and_complex():
    v = QuadraticValue(-1, 1, -7)  # (-1 + i sqrt 7)/2
    w = v.conjugate()
    assert w == QuadraticValue(-1, -1, -7)
    z = v.to_complex()
    assert abs(z.real + 0.5) < 1e-15
    assert abs(z.imag - math.sqrt(7) / 2) < 1e-15
    real = QuadraticValue(1, 1, 5)
    assert real.conjugate() == real


def test_qexact_field_axioms():
    a = QuadraticValue(1, 1, 5).exact()   # (1 + sqrt 5)/2, golden ratio
    # phi^2 = phi + 1
    assert a * a == a + QExact.rational(1)
    b = QuadraticValue(0, 2, 2).exact()   # sqrt 2
    assert b * b == QExact.rational(2)
    c = QuadraticValue(0, 2, -7).exact()  # i sqrt 7
    assert c * c == QExact.rational(-7)
    # sqrt 2 * sqrt 3 = sqrt 6, mixed radicands
    s3 = QuadraticValue(0, 2, 3).exact()
    prod = b * s3
    assert prod.terms == {6: Fraction(1)}
    # i sqrt 2 * i sqrt 3 = -sqrt 6
    i2 = QuadraticValue(0, 2, -2).exact()
    i3 = QuadraticValue(0, 2, -3).exact()
    assert (i2 * i3).terms == {6: Fraction(-1)}
    # sqrt 2 * i sqrt 3 = i sqrt 6
    assert (b * i3).terms == {-6: Fraction(1)}


def test_qexact_sub_and_zero():
    a = QuadraticValue(3, 1, 5).exact()
    assert (a - a).is_zero
    assert (a - a).is_rational
    assert a.rational_part() == Fraction(3, 2)
    assert a.irrational_part().terms == {5: Fraction(1, 2)}


def test_qexact_scale_drops_zero():
    a = QuadraticValue(1, 1, 5).exact()
    assert a.scale(0).is_zero
