"""Piecewise-linear maps of the real line, checked to be 1-Lipschitz."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .errors import LipschitzViolation, PreconditionError
from .grid_core import as_fraction

__all__ = ["PiecewiseLinear", "identity", "positive_part", "negative_part", "clamp"]


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation of ``(x, y)`` knots, extended by the given end slopes."""

    xs: tuple
    ys: tuple
    left_slope: Fraction | None = None
    right_slope: Fraction | None = None

    def __post_init__(self):
        xs = tuple(as_fraction(x) for x in self.xs)
        ys = tuple(as_fraction(y) for y in self.ys)
        if not xs or len(xs) != len(ys):
            raise PreconditionError("need matching, non-empty knot lists")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise PreconditionError("knots must increase strictly")
        slopes = [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
        left = as_fraction(self.left_slope) if self.left_slope is not None else (slopes[0] if slopes else Fraction(0))
        right = as_fraction(self.right_slope) if self.right_slope is not None else (slopes[-1] if slopes else Fraction(0))
        for k in slopes + [left, right]:
            if abs(k) > 1:
                raise LipschitzViolation(f"slope {k} exceeds 1 in absolute value")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "left_slope", left)
        object.__setattr__(self, "right_slope", right)

    def __call__(self, t) -> Fraction:
        t = as_fraction(t)
        xs, ys = self.xs, self.ys
        if t <= xs[0]:
            return ys[0] + self.left_slope * (t - xs[0])
        if t >= xs[-1]:
            return ys[-1] + self.right_slope * (t - xs[-1])
        i = bisect_right(xs, t) - 1
        return ys[i] + (ys[i + 1] - ys[i]) * (t - xs[i]) / (xs[i + 1] - xs[i])


def identity() -> PiecewiseLinear:
    return PiecewiseLinear((0, 1), (0, 1))


def positive_part() -> PiecewiseLinear:
    return PiecewiseLinear((0,), (0,), left_slope=0, right_slope=1)


def negative_part() -> PiecewiseLinear:
    """``t -> max(-t, 0)``."""
    return PiecewiseLinear((0,), (0,), left_slope=-1, right_slope=0)


def clamp(lo, hi) -> PiecewiseLinear:
    return PiecewiseLinear((lo, hi), (lo, hi), left_slope=0, right_slope=0)
