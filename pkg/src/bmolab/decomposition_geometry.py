"""Bi-density constants, multilevel decompositions and the three-set balancing descent.

Given a cube (or special rectangle) split into ``E+``, ``E-`` and ``G`` with
``min(|E+|, |E-|) > tau |G|``, :func:`chain_descent` finds a sub-region ``W``
of the same family carrying at least an ``s`` fraction of both ``E+`` and
``E-``.  Every measure is exact; irrational constants are :class:`Surd`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DegenerateSet, DimMismatch, HypothesisViolated, PreconditionError, UnsupportedKind
from .grid_core import (
    AxisCube,
    CellSet,
    CollectionKind,
    GridSpec,
    Region,
    SpecialRectangle,
    rescale,
    unit_cube,
)
from .surd import SQRT2_MINUS_1, THREE_MINUS_2SQRT2, Surd, smin

__all__ = [
    "DecompositionSpec",
    "DYADIC",
    "FALSE_CUBE",
    "TriPartition",
    "BalanceCertificate",
    "bidensity_constant",
    "bidensity_dyadic",
    "bidensity_multilevel",
    "bidensity_continuous",
    "continuous_tolerance",
    "chain_descent",
    "certified_pair",
    "certified_s",
    "fraction_in",
]

Number = Union[Fraction, Surd]


@dataclass(frozen=True)
class DecompositionSpec:
    """Child rule of a multilevel decomposition: ``"dyadic"`` or ``"false_cube"``."""

    rule: str

    def __post_init__(self):
        if self.rule not in ("dyadic", "false_cube"):
            raise PreconditionError(f"unknown child rule {self.rule!r}")

    def multiplicity(self, dim: int) -> int:
        return 1 << dim if self.rule == "dyadic" else 2

    def children(self, region: Region) -> list[Region]:
        """Equal-measure, non-overlapping children covering ``region``, in index order."""
        if self.rule == "dyadic":
            return _dyadic_children(region)
        return _false_cube_children(region)

    def root(self, dim: int) -> Region:
        q = unit_cube(dim)
        return q if self.rule == "dyadic" else SpecialRectangle(0, q.corner, q.sides)

    @classmethod
    def for_kind(cls, kind) -> "DecompositionSpec":
        kind = CollectionKind.parse(kind)
        if kind is CollectionKind.SPECIAL_RECTANGLES:
            return FALSE_CUBE
        return DYADIC


DYADIC = DecompositionSpec("dyadic")
FALSE_CUBE = DecompositionSpec("false_cube")


def _split_ready(region: Region, need_even) -> tuple[int, tuple, tuple]:
    level, corner, sides = region.level, tuple(region.corner), tuple(region.sides)
    if any(sides[i] % 2 for i in need_even):
        level += 1
        corner, sides = rescale(region, level)
    return level, corner, sides


def _dyadic_children(region: Region) -> list[AxisCube]:
    if not isinstance(region, AxisCube):
        raise PreconditionError("the dyadic rule splits axis cubes")
    d = region.dim
    level, corner, sides = _split_ready(region, range(d))
    h = sides[0] // 2
    out = []
    for k in range(1 << d):
        offs = [(k >> (d - 1 - i)) & 1 for i in range(d)]  # axis 0 most significant
        out.append(AxisCube(level, tuple(c + o * h for c, o in zip(corner, offs)), h))
    return out


def _false_cube_children(region: Region) -> list[SpecialRectangle]:
    sides = tuple(region.sides)
    m = min(sides)
    long_axes = [i for i, s in enumerate(sides) if s == 2 * m]
    axis = long_axes[0] if long_axes else 0
    level, corner, sides = _split_ready(region, [axis])
    h = sides[axis] // 2
    out = []
    for k in (0, 1):
        c = list(corner)
        c[axis] += k * h
        sd = list(sides)
        sd[axis] = h
        out.append(SpecialRectangle(level, tuple(c), tuple(sd)))
    return out


def fraction_in(E: CellSet, region: Region) -> Fraction:
    return E.measure_in(region) / region.measure


@dataclass(frozen=True)
class TriPartition:
    plus: CellSet
    minus: CellSet
    rest: CellSet

    def __post_init__(self):
        spec = self.plus.spec
        if self.minus.spec != spec or self.rest.spec != spec:
            raise DimMismatch("the three sets live on different grids")
        if not (self.plus.is_disjoint(self.minus) and self.plus.is_disjoint(self.rest) and self.minus.is_disjoint(self.rest)):
            raise PreconditionError("E+, E- and G must be pairwise disjoint")
        if (self.plus | self.minus | self.rest).bits != CellSet.full(spec).bits:
            raise PreconditionError("E+, E- and G must cover the unit cube")

    @property
    def spec(self) -> GridSpec:
        return self.plus.spec

    @classmethod
    def from_labels(cls, spec: GridSpec, labels) -> "TriPartition":
        """Labels per cell: 0 = G, 1 = E+, 2 = E-."""
        p = m = g = 0
        for i, lab in enumerate(labels):
            if lab == 1:
                p |= 1 << i
            elif lab == 2:
                m |= 1 << i
            elif lab == 0:
                g |= 1 << i
            else:
                raise PreconditionError(f"bad label {lab!r}")
        return cls(CellSet(spec, p), CellSet(spec, m), CellSet(spec, g))

    def swapped(self) -> "TriPartition":
        return TriPartition(self.minus, self.plus, self.rest)

    def labels(self) -> list[int]:
        return [1 if i in self.plus else 2 if i in self.minus else 0 for i in range(self.spec.cell_count)]


@dataclass(frozen=True)
class BalanceCertificate:
    region: Region
    frac_plus: Fraction
    frac_minus: Fraction
    s: Number
    case: str
    tau: Number
    depth: int

    @property
    def min_fraction(self) -> Fraction:
        return min(self.frac_plus, self.frac_minus)

    def recheck(self, part: TriPartition) -> bool:
        fp = fraction_in(part.plus, self.region)
        fm = fraction_in(part.minus, self.region)
        return fp == self.frac_plus and fm == self.frac_minus and min(fp, fm) >= self.s

    def as_dict(self) -> dict:
        r = self.region
        return {
            "region": {"type": type(r).__name__, "level": r.level, "corner": list(r.corner), "sides": list(r.sides)},
            "frac_plus": str(self.frac_plus),
            "frac_minus": str(self.frac_minus),
            "s": str(self.s),
            "s_float": float(self.s),
            "case": self.case,
            "tau": str(self.tau),
            "depth": self.depth,
        }


def bidensity_constant(rule: DecompositionSpec, dim: int) -> Fraction:
    """Constant guaranteed by the ancestor walk: ``(1/M)(1 - 1/M)``."""
    M = rule.multiplicity(dim)
    return Fraction(M - 1, M * M)


def bidensity_multilevel(E: CellSet, Q: Region, rule: DecompositionSpec) -> Region:
    """Region ``W`` in the decomposition tree of ``Q`` balancing ``E`` and ``Q \\ E``.

    Both parts of ``W`` have fraction at least ``(1/M)(1 - 1/M)``.
    """
    M = rule.multiplicity(E.spec.dim)
    lo, hi = Fraction(1, M), 1 - Fraction(1, M)
    q = fraction_in(E, Q)
    if q == 0 or q == 1:
        raise DegenerateSet("E fills none or all of the region")
    if lo <= q <= hi:
        return Q
    minority = E if q < lo else E.complement()
    # descend through the densest child (lowest index on ties) until pure;
    # the grid analogue of picking a density point
    chain = [Q]
    while fraction_in(minority, chain[-1]) < 1:
        kids = rule.children(chain[-1])
        fr = [fraction_in(minority, k) for k in kids]
        chain.append(kids[fr.index(max(fr))])
    # walk up from the pure region to the first ancestor that is not minority-dense
    for n in range(len(chain) - 1, 0, -1):
        if fraction_in(minority, chain[n - 1]) < hi:
            return chain[n - 1]
    raise AssertionError("root is minority-dense, contradicting the fraction test")


def bidensity_dyadic(E: CellSet, Q: AxisCube) -> AxisCube:
    if not (isinstance(Q, AxisCube) and Q.is_dyadic()):
        raise PreconditionError("Q must be a dyadic cube")
    return bidensity_multilevel(E, Q, DYADIC)


def continuous_tolerance(n: int, d: int) -> Fraction:
    return 1 - Fraction(n, n + 1) ** d


def _cube_path(a: tuple, b: tuple, lo: tuple, size: int):
    """Nested cubes from unit cube at ``a`` to unit cube at ``b``, sides changing by one."""
    d = len(a)
    corner, side = list(a), 1
    path = [(tuple(corner), side)]
    while not all(corner[i] <= b[i] < corner[i] + side for i in range(d)):
        for i in range(d):
            if b[i] < corner[i] or (corner[i] + side >= lo[i] + size and b[i] >= corner[i]):
                corner[i] -= 1
        side += 1
        path.append((tuple(corner), side))
    while side > 1:
        for i in range(d):
            if b[i] == corner[i] + side - 1 and b[i] > corner[i]:
                corner[i] += 1
        side -= 1
        path.append((tuple(corner), side))
    return path


def bidensity_continuous(E: CellSet, Q: AxisCube, s, refine: int = 0) -> AxisCube:
    """Cube ``W`` inside ``Q`` whose E-fraction is within ``continuous_tolerance(side, d)`` of ``s``.

    Walks a nested path of refined cubes from a cell inside ``E`` to a cell
    outside it and returns the closest qualifying cube (earliest on ties).
    """
    s = Fraction(s)
    if not 0 < s < 1:
        raise PreconditionError("target s must lie in (0, 1)")
    q = fraction_in(E, Q)
    if q == 0 or q == 1:
        raise DegenerateSet("E fills none or all of Q")
    if q == s:
        return Q
    d = E.spec.dim
    level = max(Q.level, E.spec.level) + refine
    (lo, sides) = rescale(Q, level)
    size = sides[0]
    k = level - E.spec.level
    inside = outside = None
    spec = E.spec
    for i in range(spec.cell_count):
        cc = spec.coords(i)
        start = tuple(c << k for c in cc)
        if not all(l <= x and x + (1 << k) <= l + size for l, x in zip(lo, start)):
            continue
        if i in E and inside is None:
            inside = start
        if i not in E and outside is None:
            outside = start
        if inside is not None and outside is not None:
            break
    best, best_gap = None, None
    for corner, side in _cube_path(inside, outside, lo, size):
        W = AxisCube(level, corner, side)
        gap = abs(fraction_in(E, W) - s)
        if gap <= continuous_tolerance(side, d) and (best is None or gap < best_gap):
            best, best_gap = W, gap
    return best


def certified_s(tau: Number, M: int, delta: Number) -> Number:
    tau = Surd.coerce(tau)
    if tau <= 0:
        raise PreconditionError("tau must be positive")
    if tau <= SQRT2_MINUS_1:
        core = (tau - tau * tau) / ((1 + tau) * M)
    else:
        core = THREE_MINUS_2SQRT2 / M
    out = smin(core, delta)
    return out.a if out.is_rational else out


def certified_pair(d: int, kind="cubes") -> tuple[Surd, Surd]:
    """``(sqrt2 - 1, s)`` with ``s = 2^-d (3 - 2 sqrt2)`` for cubes, ``(3 - 2 sqrt2)/2`` for special rectangles."""
    kind = CollectionKind.parse(kind)
    if kind is CollectionKind.INTERVALS:
        d, kind = 1, CollectionKind.CUBES
    if kind is CollectionKind.SPECIAL_RECTANGLES:
        return SQRT2_MINUS_1, THREE_MINUS_2SQRT2 / 2
    if kind in (CollectionKind.CUBES, CollectionKind.DYADIC_CUBES):
        return SQRT2_MINUS_1, THREE_MINUS_2SQRT2 / (1 << d)
    raise UnsupportedKind(f"no certified pair for {kind.value}")


def chain_descent(part: TriPartition, rule: DecompositionSpec = DYADIC, tau: Number = SQRT2_MINUS_1) -> BalanceCertificate:
    """Constructive three-set balancing with the certified constant ``s``."""
    tau = Surd.coerce(tau)
    if tau <= 0:
        raise PreconditionError("tau must be positive")
    lp, lm, lg = part.plus.measure(), part.minus.measure(), part.rest.measure()
    if not min(lp, lm) > tau * lg:
        raise HypothesisViolated("min(|E+|, |E-|) <= tau |G|")
    t = smin(tau, SQRT2_MINUS_1)
    d = part.spec.dim
    M = rule.multiplicity(d)
    delta = bidensity_constant(rule, d)
    s = certified_s(t, M, delta)

    def good(W):
        g = part.rest.measure_in(W)
        return min(part.plus.measure_in(W), part.minus.measure_in(W)) > t * g

    current, depth = rule.root(d), 0
    while True:
        nxt = next((c for c in rule.children(current) if good(c)), None)
        if nxt is None:
            break
        current, depth = nxt, depth + 1
    kids = rule.children(current)
    big, small = part.plus, part.minus
    if small.measure_in(current) > big.measure_in(current):
        big, small = small, big

    if part.rest.measure_in(current) == 0:
        W, case = bidensity_multilevel(big, current, rule), "bidensity"
    elif any(small.measure_in(k) == k.measure for k in kids):
        W, case = current, "full-child"
    else:
        W, case = current, "unbalanced-child"
        for k in kids:
            if part.rest.measure_in(k) == 0 and small.measure_in(k) > 0:
                W, case = bidensity_multilevel(big, k, rule), "bidensity"
                break
    cert = BalanceCertificate(
        W, fraction_in(part.plus, W), fraction_in(part.minus, W), s, case, t, depth
    )
    if not cert.min_fraction >= s:
        raise AssertionError(f"certificate fraction {cert.min_fraction} below s = {s}")
    return cert
