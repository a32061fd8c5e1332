"""Medians, the oscillation functionals O, A, D, and BMO seminorms.

For a weighted sample on a set ``E`` of measure ``lam``:

* ``O`` is the least mean absolute deviation, attained at any median;
* ``A`` is the mean absolute deviation from the mean;
* ``D`` is the average of ``|f(x) - f(y)|`` over ``E x E``.

They satisfy ``0 <= O <= A <= D <= 2*O``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import PreconditionError
from .grid_core import (
    CollectionKind,
    Domain,
    GridFunction,
    Region,
    WeightedSample,
    enumerate_regions,
    sample,
)

__all__ = [
    "MedianResult",
    "OscillationReport",
    "SeminormResult",
    "median",
    "median_of_sample",
    "oscillation",
    "oscillation_of_sample",
    "deviation_integral",
    "d_functional_pairwise",
    "bmo_seminorm",
    "seminorm_over",
    "median_vs_mean_gap",
    "FLAVORS",
]

FLAVORS = ("O", "A", "D")


@dataclass(frozen=True)
class MedianResult:
    lo: Fraction
    hi: Fraction

    @property
    def m(self) -> Fraction:
        return self.lo


@dataclass(frozen=True)
class OscillationReport:
    O: Fraction
    A: Fraction
    D: Fraction
    mean: Fraction
    median: MedianResult

    def get(self, flavor: str) -> Fraction:
        return {"O": self.O, "A": self.A, "D": self.D}[flavor]


@dataclass(frozen=True)
class SeminormResult:
    value: Fraction
    region: Region | None


def _as_sample(f, where) -> WeightedSample:
    if isinstance(f, WeightedSample):
        return f
    return sample(f, where)


def median_of_sample(ws: WeightedSample) -> MedianResult:
    total, acc = ws.total, 0
    for i, (v, w) in enumerate(zip(ws.values, ws.weights)):
        acc += w
        if 2 * acc >= total:
            if 2 * acc == total and i + 1 < len(ws.values):
                return MedianResult(v, ws.values[i + 1])
            return MedianResult(v, v)
    raise AssertionError("unreachable: weights sum to total")


def median(f: GridFunction, where: Domain = None) -> MedianResult:
    """The full median set ``[lo, hi]``; ``lo`` is the canonical median."""
    return median_of_sample(_as_sample(f, where))


def deviation_integral(ws: WeightedSample, c) -> Fraction:
    """Integral of ``|f - c|`` over the sample's set."""
    c = Fraction(c)
    num = sum(w * abs(v - c) for v, w in zip(ws.values, ws.weights))
    return num / ws.scale


def d_functional_pairwise(ws: WeightedSample) -> Fraction:
    """The D functional as the literal double sum (quadratic; used as an oracle)."""
    num = Fraction(0)
    for v1, w1 in zip(ws.values, ws.weights):
        for v2, w2 in zip(ws.values, ws.weights):
            num += w1 * w2 * abs(v1 - v2)
    return num / (ws.total * ws.total)


def _d_functional(ws: WeightedSample) -> Fraction:
    # values ascending: sum_{i<j} w_i w_j (v_j - v_i) via prefix sums
    num, wsum, vsum = Fraction(0), 0, Fraction(0)
    for v, w in zip(ws.values, ws.weights):
        num += w * (v * wsum - vsum)
        wsum += w
        vsum += w * v
    return 2 * num / (ws.total * ws.total)


def oscillation_of_sample(ws: WeightedSample) -> OscillationReport:
    med = median_of_sample(ws)
    lam = ws.measure
    mean = sum((v * w for v, w in zip(ws.values, ws.weights)), Fraction(0)) / ws.total
    O = deviation_integral(ws, med.lo) / lam
    A = deviation_integral(ws, mean) / lam
    return OscillationReport(O, A, _d_functional(ws), mean, med)


def oscillation(f: GridFunction, where: Domain = None) -> OscillationReport:
    return oscillation_of_sample(_as_sample(f, where))


def seminorm_over(
    f: GridFunction,
    kind,
    functional: Callable[[WeightedSample], Fraction],
    refine: int = 0,
    within: Region | None = None,
    stop_at=None,
) -> SeminormResult:
    """Maximum of ``functional`` over a region collection; first maximiser wins.

    ``stop_at`` is an optional a-priori upper bound; the scan stops once it is hit.
    """
    best, arg = None, None
    for region in enumerate_regions(kind, f.spec, refine, within):
        v = functional(sample(f, region))
        if best is None or v > best:
            best, arg = v, region
            if stop_at is not None and best >= stop_at:
                break
    return SeminormResult(best, arg)


def bmo_seminorm(
    f: GridFunction, kind="cubes", flavor: str = "O", refine: int = 0
) -> Fraction:
    """Sup of the chosen oscillation functional over the collection."""
    if flavor not in FLAVORS:
        raise PreconditionError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    kind = CollectionKind.parse(kind)

    def fn(ws):
        return oscillation_of_sample(ws).get(flavor)

    return seminorm_over(f, kind, fn, refine).value


def median_vs_mean_gap(f: GridFunction, where: Domain = None) -> Fraction:
    """``|mean - m|`` for the canonical median, checked against O at both median endpoints."""
    ws = _as_sample(f, where)
    rep = oscillation_of_sample(ws)
    lam = ws.measure
    for m in (rep.median.lo, rep.median.hi):
        gap = abs(rep.mean - m)
        o_at_m = deviation_integral(ws, m) / lam
        if gap > o_at_m:
            raise AssertionError(f"mean-median gap {gap} exceeds O = {o_at_m}")
    return abs(rep.mean - rep.median.lo)
