"""Distribution functions and non-increasing rearrangements.

The rearrangement of a grid function on a set ``E`` is a right-continuous
non-increasing step function on ``(0, measure(E))`` with the same
distribution as ``|f|``.  Step functions are stored in canonical form:
strictly decreasing values, one piece per value.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import GridIncompatible, NegativeValues, PreconditionError
from .grid_core import (
    Domain,
    GridFunction,
    GridSpec,
    WeightedSample,
    as_fraction,
    sample,
)

__all__ = [
    "StepFunction",
    "DistributionFunction",
    "rearrange",
    "rearrange_sample",
    "distribution",
    "property_suite",
    "PropertyReport",
    "interval_equimeasure",
    "step_to_grid",
]


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous non-increasing step function on ``(0, length)``.

    ``breaks`` runs ``0 = t_0 < t_1 < ... < t_k = length`` and ``values[i]``
    is taken on ``[t_i, t_{i+1})``.
    """

    breaks: tuple
    values: tuple

    def __post_init__(self):
        b = tuple(as_fraction(t) for t in self.breaks)
        v = tuple(as_fraction(x) for x in self.values)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)
        if len(b) != len(v) + 1 or not v:
            raise PreconditionError("need one more breakpoint than values")
        if b[0] != 0:
            raise PreconditionError("first breakpoint must be 0")
        if any(b[i] >= b[i + 1] for i in range(len(v))):
            raise PreconditionError("breakpoints must increase strictly")
        if any(v[i] <= v[i + 1] for i in range(len(v) - 1)):
            raise PreconditionError("values must decrease strictly")

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple]) -> "StepFunction":
        """Build from ``(length, value)`` pairs with non-increasing values."""
        breaks = [Fraction(0)]
        values: list[Fraction] = []
        for length, value in pieces:
            length, value = as_fraction(length), as_fraction(value)
            if length <= 0:
                raise PreconditionError("piece lengths must be positive")
            if values and value > values[-1]:
                raise PreconditionError("piece values must be non-increasing")
            if values and value == values[-1]:
                breaks[-1] += length
            else:
                values.append(value)
                breaks.append(breaks[-1] + length)
        return cls(tuple(breaks), tuple(values))

    @property
    def length(self) -> Fraction:
        return self.breaks[-1]

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        return [(self.breaks[i + 1] - self.breaks[i], v) for i, v in enumerate(self.values)]

    def __call__(self, t) -> Fraction:
        t = as_fraction(t)
        if not 0 <= t < self.length:
            raise PreconditionError(f"{t} outside [0, {self.length})")
        return self.values[bisect_right(self.breaks, t) - 1]

    def left_limit(self, t) -> Fraction:
        t = as_fraction(t)
        if not 0 < t <= self.length:
            raise PreconditionError(f"{t} outside (0, {self.length}]")
        i = bisect_right(self.breaks, t) - 1
        return self.values[i - 1] if self.breaks[i] == t else self.values[i]

    def measure_where(self, pred) -> Fraction:
        return sum(
            (self.breaks[i + 1] - self.breaks[i] for i, v in enumerate(self.values) if pred(v)),
            Fraction(0),
        )

    def as_sample(self) -> WeightedSample:
        return WeightedSample.from_pairs((v, w) for w, v in self.pieces())

    def restrict(self, a, b) -> "StepFunction":
        """The function ``t -> self(a + t)`` on ``(0, b - a)``."""
        a, b = as_fraction(a), as_fraction(b)
        if not 0 <= a < b <= self.length:
            raise PreconditionError("bad sub-interval")
        pieces = []
        for i, v in enumerate(self.values):
            lo, hi = max(a, self.breaks[i]), min(b, self.breaks[i + 1])
            if hi > lo:
                pieces.append((hi - lo, v))
        return StepFunction.from_pieces(pieces)

    def affine(self, scale, shift) -> "StepFunction":
        """``t -> scale*self(t) + shift`` for ``scale >= 0``."""
        scale, shift = as_fraction(scale), as_fraction(shift)
        if scale < 0:
            raise PreconditionError("negative scale would break monotonicity")
        if scale == 0:
            return StepFunction((0, self.length), (shift,))
        return StepFunction(self.breaks, tuple(scale * v + shift for v in self.values))

    def to_pairs(self) -> list[list[str]]:
        return [[str(w), str(v)] for w, v in self.pieces()]


@dataclass(frozen=True)
class DistributionFunction:
    """``alpha -> measure{|f| > alpha}`` as a right-continuous step in alpha."""

    levels: tuple  # distinct values of |f|, increasing
    tail: tuple  # tail[i] = measure{|f| > levels[i]}
    total: Fraction

    def __call__(self, alpha) -> Fraction:
        alpha = as_fraction(alpha)
        i = bisect_right(self.levels, alpha) - 1
        return self.total if i < 0 else self.tail[i]


def _abs_sample(ws: WeightedSample) -> WeightedSample:
    return WeightedSample.from_int_weights(
        ((abs(v), w) for v, w in zip(ws.values, ws.weights)), ws.scale
    )


def rearrange_sample(ws: WeightedSample) -> StepFunction:
    a = _abs_sample(ws)
    pieces = [(Fraction(w, a.scale), v) for v, w in zip(reversed(a.values), reversed(a.weights))]
    return StepFunction.from_pieces(pieces)


def rearrange(f: GridFunction | StepFunction, where: Domain = None) -> StepFunction:
    """Non-increasing rearrangement of ``|f|`` on ``where``."""
    if isinstance(f, StepFunction):
        return rearrange_sample(f.as_sample())
    return rearrange_sample(sample(f, where))


def distribution(f: GridFunction, where: Domain = None) -> DistributionFunction:
    a = _abs_sample(sample(f, where))
    total = a.total
    tail, acc = [], total
    for w in a.weights:
        acc -= w
        tail.append(Fraction(acc, a.scale))
    return DistributionFunction(a.values, tuple(tail), Fraction(total, a.scale))


@dataclass
class PropertyReport:
    thresholds: list
    clauses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _thresholds(levels: Sequence[Fraction]) -> list[Fraction]:
    pts = set(levels) | {Fraction(0)}
    srt = sorted(pts)
    for x, y in zip(srt, srt[1:]):
        pts.add((x + y) / 2)
    pts.add(srt[-1] + 1)
    return sorted(p for p in pts if p >= 0)


def property_suite(f: GridFunction, where: Domain = None) -> PropertyReport:
    """Check the five rearrangement properties at every level and midpoint.

    Left sides come from the cells directly, right sides from the step
    function, so the two computations share nothing but the input.
    """
    ws = sample(f, where)
    star = rearrange_sample(ws)
    total = ws.measure

    def lam(pred):
        return ws.measure_where(lambda v: pred(abs(v)))

    alphas = _thresholds([abs(v) for v in ws.values])
    rep = PropertyReport(thresholds=alphas)
    ok = {k: True for k in ("nonincreasing", "gt", "geq", "eq", "eq_finite", "interval")}

    # (i) shape: canonical form already enforces this; re-check explicitly
    vals = star.values
    if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)) or vals[-1] < 0:
        ok["nonincreasing"] = False
        rep.failures.append(("nonincreasing", None))

    for a in alphas:
        gt_lhs = star.measure_where(lambda v: v > a)
        if gt_lhs != lam(lambda v: v > a):
            ok["gt"] = False
            rep.failures.append(("gt", a))
        if a > 0:
            if star.measure_where(lambda v: v >= a) != lam(lambda v: v >= a):
                ok["geq"] = False
                rep.failures.append(("geq", a))
            if star.measure_where(lambda v: v == a) != lam(lambda v: v == a):
                ok["eq"] = False
                rep.failures.append(("eq", a))
        # variant on the bounded interval, α = 0 included
        if star.measure_where(lambda v: v == a) != lam(lambda v: v == a):
            ok["eq_finite"] = False
            rep.failures.append(("eq_finite", a))
        # (iv): {f* > a} is (0, f_*(a)): the pieces above a form a prefix ending there
        above = [i for i, v in enumerate(vals) if v > a]
        prefix = above == list(range(len(above)))
        end = star.breaks[len(above)]
        closed_right = end < star.length and star(end) > a
        if not prefix or end != gt_lhs or closed_right:
            ok["interval"] = False
            rep.failures.append(("interval", a))
    if star.length != total:
        ok["gt"] = False
        rep.failures.append(("length", total))
    rep.clauses = ok
    return rep


def interval_equimeasure(g: GridFunction, where: Domain, c, alpha) -> tuple[Fraction, Fraction]:
    """Both sides of the level-band identity for a non-negative ``g``.

    Returns ``(|{t : |g*(t) - c| <= alpha}|, measure{x : |g(x) - c| <= alpha})``.
    """
    c, alpha = as_fraction(c), as_fraction(alpha)
    if alpha < 0:
        raise PreconditionError("alpha must be non-negative")
    ws = sample(g, where)
    if ws.values[0] < 0:
        raise NegativeValues("g takes negative values on the region")
    star = rearrange_sample(ws)
    left = star.measure_where(lambda v: abs(v - c) <= alpha)
    right = ws.measure_where(lambda v: abs(v - c) <= alpha)
    if left != right:
        raise AssertionError(f"band identity failed: {left} != {right}")
    return left, right


def step_to_grid(h: StepFunction, level: int) -> GridFunction:
    """View a step function on (0, 1) as a 1-d grid function at ``level``."""
    if h.length != 1:
        raise GridIncompatible("only step functions on (0, 1) map onto the unit grid")
    n = 1 << level
    for t in h.breaks:
        if (t * n).denominator != 1:
            raise GridIncompatible(f"breakpoint {t} is not on the level-{level} grid")
    spec = GridSpec(1, level)
    return GridFunction(spec, tuple(h(Fraction(i, n)) for i in range(n)))
