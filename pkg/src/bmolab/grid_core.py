"""Functions, sets and region families on a dyadic grid in the unit cube.

A :class:`GridSpec` fixes a dimension ``d`` and a level ``L``; the unit cube
is then split into ``2**(d*L)`` congruent cells.  Cells are numbered in
C order (axis 0 varies slowest).  Every measure produced here is an exact
dyadic rational: integer numerators over a power-of-two scale.

Regions (axis cubes and special rectangles) carry their own refinement
level, so a cube may cut through grid cells.  Partial overlaps are
accounted for with exact fractional weights.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

from .errors import DimMismatch, EmptyRegion, PreconditionError, UnsupportedKind

__all__ = [
    "GridSpec",
    "GridFunction",
    "CellSet",
    "AxisCube",
    "SpecialRectangle",
    "CollectionKind",
    "WeightedSample",
    "measure",
    "restrict",
    "sample",
    "enumerate_regions",
    "region_cells",
    "region_key",
    "unit_cube",
    "as_fraction",
]


def as_fraction(x) -> Fraction:
    """Convert ints, decimal/fraction strings and floats to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not grid values")
    if isinstance(x, (int, str, float)):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class GridSpec:
    dim: int
    level: int

    def __post_init__(self):
        if self.dim < 1:
            raise PreconditionError(f"dimension must be positive, got {self.dim}")
        if self.level < 0:
            raise PreconditionError(f"level must be non-negative, got {self.level}")

    @property
    def side_cells(self) -> int:
        return 1 << self.level

    @property
    def cell_count(self) -> int:
        return 1 << (self.dim * self.level)

    @property
    def cell_measure(self) -> Fraction:
        return Fraction(1, self.cell_count)

    def coords(self, index: int) -> tuple[int, ...]:
        n = self.side_cells
        out = []
        for _ in range(self.dim):
            index, r = divmod(index, n)
            out.append(r)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        n = self.side_cells
        idx = 0
        for c in coords:
            if not 0 <= c < n:
                raise PreconditionError(f"cell coordinate {c} outside 0..{n - 1}")
            idx = idx * n + c
        return idx

    def cell_region(self, index: int) -> "AxisCube":
        return AxisCube(self.level, self.coords(index), 1)


@dataclass(frozen=True)
class GridFunction:
    """One exact value per cell."""

    spec: GridSpec
    values: tuple
    integer_valued: bool = False

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.spec.cell_count:
            raise PreconditionError(
                f"expected {self.spec.cell_count} values, got {len(vals)}"
            )
        if self.integer_valued:
            bad = [v for v in vals if v.denominator != 1 or v < 0]
            if bad:
                raise PreconditionError(
                    f"integer-valued flag set but found {bad[0]} among the values"
                )

    @classmethod
    def constant(cls, spec: GridSpec, c) -> "GridFunction":
        return cls(spec, (as_fraction(c),) * spec.cell_count)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn) -> "GridFunction":
        """Build from ``fn(coords)`` evaluated at every cell."""
        return cls(spec, tuple(fn(spec.coords(i)) for i in range(spec.cell_count)))

    def map(self, fn, integer_valued: bool = False) -> "GridFunction":
        return GridFunction(self.spec, tuple(fn(v) for v in self.values), integer_valued)

    def __add__(self, c) -> "GridFunction":
        c = as_fraction(c)
        return self.map(lambda v: v + c)

    def __sub__(self, c) -> "GridFunction":
        c = as_fraction(c)
        return self.map(lambda v: v - c)

    def scale(self, r) -> "GridFunction":
        r = as_fraction(r)
        return self.map(lambda v: r * v)

    def value_set(self) -> list[Fraction]:
        return sorted(set(self.values))

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)


@dataclass(frozen=True)
class CellSet:
    """A union of grid cells stored as an integer bitmask (bit i = cell i)."""

    spec: GridSpec
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.spec.cell_count:
            raise PreconditionError("bitmask has bits outside the grid")

    @classmethod
    def from_cells(cls, spec: GridSpec, cells: Iterable[int]) -> "CellSet":
        bits = 0
        for c in cells:
            if not 0 <= c < spec.cell_count:
                raise PreconditionError(f"cell {c} outside grid")
            bits |= 1 << c
        return cls(spec, bits)

    @classmethod
    def full(cls, spec: GridSpec) -> "CellSet":
        return cls(spec, (1 << spec.cell_count) - 1)

    @classmethod
    def empty(cls, spec: GridSpec) -> "CellSet":
        return cls(spec, 0)

    @classmethod
    def from_region(cls, spec: GridSpec, region: "Region") -> "CellSet":
        """Cells fully covered by ``region`` (exact when the region is cell aligned)."""
        cells, scale = region_cells(spec, region)
        full = scale // spec.cell_count
        return cls.from_cells(spec, (i for i, w in cells if w == full))

    def _check(self, other: "CellSet"):
        if other.spec != self.spec:
            raise DimMismatch("cell sets live on different grids")

    def __or__(self, other):
        self._check(other)
        return CellSet(self.spec, self.bits | other.bits)

    def __and__(self, other):
        self._check(other)
        return CellSet(self.spec, self.bits & other.bits)

    def __sub__(self, other):
        self._check(other)
        return CellSet(self.spec, self.bits & ~other.bits)

    def complement(self) -> "CellSet":
        return CellSet.full(self.spec) - self

    def __contains__(self, cell: int) -> bool:
        return bool(self.bits >> cell & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self) -> Iterator[int]:
        b, i = self.bits, 0
        while b:
            if b & 1:
                yield i
            b >>= 1
            i += 1

    def measure(self) -> Fraction:
        return Fraction(len(self), self.spec.cell_count)

    def is_disjoint(self, other: "CellSet") -> bool:
        self._check(other)
        return not (self.bits & other.bits)

    def measure_in(self, region: "Region") -> Fraction:
        """Exact measure of ``self ∩ region``."""
        cells, scale = region_cells(self.spec, region)
        bits = self.bits
        return Fraction(sum(w for i, w in cells if bits >> i & 1), scale)

    def to_hex(self) -> str:
        width = max(1, (self.spec.cell_count + 3) // 4)
        return format(self.bits, f"0{width}x")

    @classmethod
    def from_hex(cls, spec: GridSpec, text: str) -> "CellSet":
        return cls(spec, int(text, 16) if text else 0)


def _check_inside(level: int, corner: Sequence[int], sides: Sequence[int]):
    n = 1 << level
    for c, s in zip(corner, sides):
        if s <= 0:
            raise PreconditionError("region sides must be positive")
        if c < 0 or c + s > n:
            raise PreconditionError("region does not lie inside the unit cube")


@dataclass(frozen=True)
class AxisCube:
    """Closed axis-parallel cube ``corner + [0, side]^d`` in units of ``2**-level``."""

    level: int
    corner: tuple
    side: int

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))
        _check_inside(self.level, self.corner, self.sides)

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def sides(self) -> tuple[int, ...]:
        return (self.side,) * len(self.corner)

    @property
    def measure(self) -> Fraction:
        return Fraction(self.side, 1 << self.level) ** self.dim

    def is_dyadic(self) -> bool:
        s = self.side
        return s & (s - 1) == 0 and all(c % s == 0 for c in self.corner)


@dataclass(frozen=True)
class SpecialRectangle:
    """Axis box whose sides all equal m or 2m, m being the shortest side."""

    level: int
    corner: tuple
    sides: tuple

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))
        object.__setattr__(self, "sides", tuple(int(s) for s in self.sides))
        if len(self.corner) != len(self.sides):
            raise DimMismatch("corner and sides differ in length")
        m = min(self.sides)
        if any(s not in (m, 2 * m) for s in self.sides):
            raise PreconditionError(f"sides {self.sides} are not all m or 2m")
        _check_inside(self.level, self.corner, self.sides)

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def measure(self) -> Fraction:
        out = Fraction(1)
        for s in self.sides:
            out *= Fraction(s, 1 << self.level)
        return out


Region = Union[AxisCube, SpecialRectangle]


def unit_cube(dim: int) -> AxisCube:
    return AxisCube(0, (0,) * dim, 1)


def region_key(region: Region) -> tuple:
    """Geometry-only identity: reduced (level, corner, sides), type ignored."""
    level, corner, sides = region.level, list(region.corner), list(region.sides)
    while level > 0 and all(c % 2 == 0 for c in corner) and all(s % 2 == 0 for s in sides):
        level -= 1
        corner = [c // 2 for c in corner]
        sides = [s // 2 for s in sides]
    return (level, tuple(corner), tuple(sides))


def rescale(region: Region, level: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Corner and sides of ``region`` expressed at a finer ``level``."""
    if level < region.level:
        raise PreconditionError("cannot express a region at a coarser level")
    k = level - region.level
    return tuple(c << k for c in region.corner), tuple(s << k for s in region.sides)


def contains(outer: Region, inner: Region) -> bool:
    k = max(outer.level, inner.level)
    oc, os_ = rescale(outer, k)
    ic, is_ = rescale(inner, k)
    return all(o <= i and i + s <= o + t for o, t, i, s in zip(oc, os_, ic, is_))


@lru_cache(maxsize=1 << 16)
def _cells_of(spec: GridSpec, level: int, corner: tuple, sides: tuple):
    k = max(spec.level, level)
    shift = k - level
    cell = 1 << (k - spec.level)
    per_axis = []
    for c, s in zip(corner, sides):
        lo, hi = c << shift, (c + s) << shift
        axis = []
        for j in range(lo // cell, (hi - 1) // cell + 1):
            ov = min(hi, (j + 1) * cell) - max(lo, j * cell)
            if ov > 0:
                axis.append((j, ov))
        per_axis.append(axis)
    n = spec.side_cells
    out = []
    for combo in itertools.product(*per_axis):
        idx, w = 0, 1
        for j, ov in combo:
            idx = idx * n + j
            w *= ov
        out.append((idx, w))
    out.sort()
    return tuple(out), 1 << (spec.dim * k)


def region_cells(spec: GridSpec, region: Region) -> tuple[tuple[tuple[int, int], ...], int]:
    """Cells meeting ``region`` with integer overlap weights and their common scale.

    ``sum(weights) / scale`` equals the measure of the region.
    """
    if region.dim != spec.dim:
        raise DimMismatch(f"region is {region.dim}-dimensional, grid is {spec.dim}")
    return _cells_of(spec, region.level, tuple(region.corner), tuple(region.sides))


@dataclass(frozen=True)
class WeightedSample:
    """Distinct values in increasing order with positive integer weights over ``scale``."""

    values: tuple
    weights: tuple
    scale: int

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "WeightedSample":
        acc: dict[Fraction, Fraction] = {}
        for v, w in pairs:
            w = as_fraction(w)
            if w < 0:
                raise PreconditionError("negative weight")
            if w:
                v = as_fraction(v)
                acc[v] = acc.get(v, Fraction(0)) + w
        if not acc:
            raise EmptyRegion("sample has zero total weight")
        scale = 1
        for w in acc.values():
            scale = scale * w.denominator // _gcd(scale, w.denominator)
        vals = tuple(sorted(acc))
        return cls(vals, tuple(int(acc[v] * scale) for v in vals), scale)

    @classmethod
    def from_int_weights(cls, pairs: Iterable[tuple], scale: int) -> "WeightedSample":
        acc: dict[Fraction, int] = {}
        for v, w in pairs:
            if w:
                acc[v] = acc.get(v, 0) + w
        if not acc:
            raise EmptyRegion("sample has zero total weight")
        vals = tuple(sorted(acc))
        return cls(vals, tuple(acc[v] for v in vals), scale)

    @property
    def total(self) -> int:
        return sum(self.weights)

    @property
    def measure(self) -> Fraction:
        return Fraction(self.total, self.scale)

    def pairs(self) -> list[tuple[Fraction, Fraction]]:
        return [(v, Fraction(w, self.scale)) for v, w in zip(self.values, self.weights)]

    def map(self, fn) -> "WeightedSample":
        return WeightedSample.from_int_weights(
            ((as_fraction(fn(v)), w) for v, w in zip(self.values, self.weights)), self.scale
        )

    def measure_where(self, pred) -> Fraction:
        return Fraction(sum(w for v, w in zip(self.values, self.weights) if pred(v)), self.scale)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


Domain = Union[CellSet, AxisCube, SpecialRectangle, None]


def sample(f: GridFunction, where: Domain = None) -> WeightedSample:
    """Weighted distinct values of ``f`` on ``where`` (default: whole grid)."""
    spec = f.spec
    if where is None:
        where = CellSet.full(spec)
    if isinstance(where, CellSet):
        if where.spec != spec:
            raise DimMismatch("set and function live on different grids")
        if not where.bits:
            raise EmptyRegion("empty cell set")
        vals = f.values
        return WeightedSample.from_int_weights(((vals[i], 1) for i in where), spec.cell_count)
    cells, scale = region_cells(spec, where)
    vals = f.values
    return WeightedSample.from_int_weights(((vals[i], w) for i, w in cells), scale)


def restrict(f: GridFunction, where: Domain) -> list[tuple[Fraction, Fraction]]:
    """(value, weight) pairs of ``f`` on ``where``, merged by value, values ascending."""
    return sample(f, where).pairs()


def measure(s: Union[CellSet, Region]) -> Fraction:
    if isinstance(s, CellSet):
        return s.measure()
    return s.measure


class CollectionKind(enum.Enum):
    CUBES = "cubes"
    DYADIC_CUBES = "dyadic"
    SPECIAL_RECTANGLES = "special_rectangles"
    INTERVALS = "intervals"
    CONVEX_BODIES = "convex_bodies"

    @classmethod
    def parse(cls, text: "str | CollectionKind") -> "CollectionKind":
        if isinstance(text, CollectionKind):
            kind = text
        else:
            key = text.strip().lower().replace("-", "_")
            aliases = {
                "cubes": cls.CUBES,
                "cube": cls.CUBES,
                "dyadic": cls.DYADIC_CUBES,
                "dyadiccubes": cls.DYADIC_CUBES,
                "dyadic_cubes": cls.DYADIC_CUBES,
                "special_rectangles": cls.SPECIAL_RECTANGLES,
                "specialrectangles": cls.SPECIAL_RECTANGLES,
                "rectangles": cls.SPECIAL_RECTANGLES,
                "intervals": cls.INTERVALS,
                "convex_bodies": cls.CONVEX_BODIES,
                "convex": cls.CONVEX_BODIES,
            }
            if key not in aliases:
                raise UnsupportedKind(f"unknown region collection {text!r}")
            kind = aliases[key]
        kind.require_supported()
        return kind

    def require_supported(self):
        if self is CollectionKind.CONVEX_BODIES:
            raise UnsupportedKind("convex bodies are not implemented")


def _within_box(spec: GridSpec, level: int, within: Region | None):
    if within is None:
        return (0,) * spec.dim, (1 << level,) * spec.dim
    if within.dim != spec.dim:
        raise DimMismatch("`within` region has the wrong dimension")
    if within.level > level:
        raise PreconditionError("`within` is finer than the enumeration level")
    return rescale(within, level)


def enumerate_regions(
    kind: "CollectionKind | str",
    spec: GridSpec,
    refine: int = 0,
    within: Region | None = None,
) -> list[Region]:
    """All regions of a collection on the grid, largest first then by corner.

    Cubes and special rectangles live at level ``spec.level + refine``;
    dyadic cubes run from the whole cube down to single cells.
    """
    kind = CollectionKind.parse(kind)
    if refine < 0:
        raise PreconditionError("refine must be non-negative")
    if kind is CollectionKind.INTERVALS:
        if spec.dim != 1:
            raise DimMismatch("intervals need a one-dimensional grid")
        kind = CollectionKind.CUBES
    return list(_enumerate_cached(kind, spec, refine, within))


@lru_cache(maxsize=256)
def _enumerate_cached(kind, spec, refine, within):
    if kind is CollectionKind.DYADIC_CUBES:
        return tuple(_dyadic(spec, within))
    level = spec.level + refine
    lo, ext = _within_box(spec, level, within)
    if kind is CollectionKind.CUBES:
        return tuple(_cubes(level, lo, ext))
    return tuple(_special(level, lo, ext))


def _cubes(level, lo, ext):
    for side in range(min(ext), 0, -1):
        ranges = [range(l, l + e - side + 1) for l, e in zip(lo, ext)]
        for corner in itertools.product(*ranges):
            yield AxisCube(level, corner, side)


def _special(level, lo, ext):
    d = len(lo)
    shapes = []
    for m in range(min(ext), 0, -1):
        for pattern in itertools.product((1, 2), repeat=d):
            if 1 not in pattern:
                continue  # all sides 2m is the cube of side 2m
            sides = tuple(m * p for p in pattern)
            if all(s <= e for s, e in zip(sides, ext)):
                shapes.append(sides)
    # larger measure first, then lexicographically larger sides
    shapes.sort(key=lambda s: (-_prod(s), tuple(-x for x in s)))
    for sides in shapes:
        ranges = [range(l, l + e - s + 1) for l, e, s in zip(lo, ext, sides)]
        for corner in itertools.product(*ranges):
            yield SpecialRectangle(level, corner, sides)


def _dyadic(spec, within):
    L = spec.level
    if within is not None:
        lo, ext = _within_box(spec, L, within)
    else:
        lo, ext = (0,) * spec.dim, (1 << L,) * spec.dim
    for j in range(L + 1):
        side = 1 << (L - j)
        ranges = []
        for l, e in zip(lo, ext):
            start = -(-l // side) * side
            ranges.append(range(start, l + e - side + 1, side))
        for corner in itertools.product(*ranges):
            yield AxisCube(L, corner, side)


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out
