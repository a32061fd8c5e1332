import math
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bmolab import Surd
from bmolab.surd import SQRT2_MINUS_1, THREE_MINUS_2SQRT2, parse_surd, smin

getcontext().prec = 60
ROOT2 = Decimal(2).sqrt()

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)
surds = st.builds(Surd, rationals, rationals)


def dec(x: Surd) -> Decimal:
    return Decimal(x.a.numerator) / Decimal(x.a.denominator) + Decimal(x.b.numerator) / Decimal(x.b.denominator) * ROOT2


@given(surds, surds)
def test_order_matches_high_precision_decimal(x, y):
    dx, dy = dec(x), dec(y)
    if x == y:
        assert dx == dy
    else:
        assert (x < y) == (dx < dy)


@given(surds, surds)
def test_field_operations(x, y):
    assert abs(dec(x + y) - (dec(x) + dec(y))) < Decimal(10) ** -40
    assert abs(dec(x * y) - dec(x) * dec(y)) < Decimal(10) ** -40
    if y != 0:
        assert abs(dec(x / y) * dec(y) - dec(x)) < Decimal(10) ** -40


@given(surds)
def test_float_is_correctly_rounded(x):
    assert float(x) == float(dec(x))
    assert float(THREE_MINUS_2SQRT2 / 2) == float((3 - 2 * ROOT2) / 2)


@given(surds)
def test_floor_matches_decimal(x):
    assert math.floor(x) == math.floor(dec(x))


def test_named_constants():
    assert SQRT2_MINUS_1 * SQRT2_MINUS_1 == THREE_MINUS_2SQRT2
    assert parse_surd("sqrt2-1") == SQRT2_MINUS_1
    assert parse_surd("3/8") == Surd(Fraction(3, 8))
    assert smin(Fraction(1, 2), SQRT2_MINUS_1, 1) == SQRT2_MINUS_1
    assert abs(dec(THREE_MINUS_2SQRT2 / 2) - Decimal("0.0857864376269049511983112757")) < Decimal(10) ** -25


def test_zero_reciprocal():
    with pytest.raises(ZeroDivisionError):
        Surd(0, 0).reciprocal()
