"""Exact arithmetic in Q(sqrt 2).

The certified balancing constants involve sqrt(2) - 1 and 3 - 2*sqrt(2).
Comparing those against exact dyadic measures in floating point would blur
the strict/non-strict distinctions the searches depend on, so numbers of the
form a + b*sqrt(2) with rational a, b are kept symbolic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Union[int, Fraction]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@total_ordering
class Surd:
    """The number ``a + b*sqrt(2)``."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def coerce(cls, x: "Surd | Rational | str") -> "Surd":
        if isinstance(x, Surd):
            return x
        if isinstance(x, str):
            return parse_surd(x)
        if isinstance(x, float):
            return cls(Fraction(x))
        return cls(Fraction(x))

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        return sa * _sign(self.a * self.a - 2 * self.b * self.b)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __floor__(self) -> int:
        n = math.floor(float(self))
        while Surd(n) > self:
            n -= 1
        while Surd(n + 1) <= self:
            n += 1
        return n

    def __float__(self) -> float:
        """Correctly rounded: bracket sqrt(2) until both ends round alike."""
        if self.b == 0:
            return float(self.a)
        k = 64
        while True:
            r = math.isqrt(2 << (2 * k))
            lo = float(self.a + self.b * Fraction(r, 1 << k))
            if lo == float(self.a + self.b * Fraction(r + 1, 1 << k)):
                return lo
            k *= 2

    def __add__(self, other):
        o = Surd.coerce(other)
        return Surd(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Surd.coerce(other))

    def __rsub__(self, other):
        return Surd.coerce(other) - self

    def __mul__(self, other):
        o = Surd.coerce(other)
        return Surd(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def reciprocal(self) -> "Surd":
        norm = self.a * self.a - 2 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return Surd(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        return self * Surd.coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return Surd.coerce(other) * self.reciprocal()

    def __eq__(self, other):
        try:
            o = Surd.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        return (self - Surd.coerce(other)).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Surd({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt(2)"


def parse_surd(text: str) -> Surd:
    """Parse a rational literal or one of the named constants."""
    t = text.strip().lower().replace(" ", "")
    named = {
        "sqrt2-1": SQRT2_MINUS_1,
        "sqrt(2)-1": SQRT2_MINUS_1,
        "3-2sqrt2": THREE_MINUS_2SQRT2,
        "3-2*sqrt(2)": THREE_MINUS_2SQRT2,
    }
    if t in named:
        return named[t]
    return Surd(Fraction(t))


def smin(*xs) -> Surd:
    vals = [Surd.coerce(x) for x in xs]
    best = vals[0]
    for v in vals[1:]:
        if v < best:
            best = v
    return best


SQRT2_MINUS_1 = Surd(-1, 1)
THREE_MINUS_2SQRT2 = Surd(3, -2)
