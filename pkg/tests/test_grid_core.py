from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bmolab import AxisCube, CellSet, GridFunction, GridSpec, SpecialRectangle, enumerate_regions, unit_cube
from bmolab.errors import DimMismatch, EmptyRegion, PreconditionError, UnsupportedKind
from bmolab.grid_core import CollectionKind, contains, measure, region_cells, region_key, restrict

from oracles import SPECS, cell_pairs, cell_sets, cubes_in, grid_functions


def test_measure_examples():
    spec = GridSpec(1, 2)
    assert measure(CellSet.empty(spec)) == 0
    for d, L in [(1, 3), (2, 2), (3, 1)]:
        assert measure(CellSet.full(GridSpec(d, L))) == 1
    assert measure(CellSet.from_cells(spec, [0, 2])) == Fraction(1, 2)


def test_restrict_examples():
    f = GridFunction.constant(GridSpec(2, 1), 3)
    assert restrict(f, unit_cube(2)) == [(3, 1)]
    g = GridFunction(GridSpec(1, 1), (2, 5))
    assert restrict(g, AxisCube(1, (0,), 1)) == [(2, Fraction(1, 2))]
    h = GridFunction(GridSpec(1, 2), (1, 2, 3, 4))
    assert restrict(h, AxisCube(3, (1,), 4)) == [(1, Fraction(1, 8)), (2, Fraction(1, 4)), (3, Fraction(1, 8))]


def test_restrict_rejects_empty_cellset():
    f = GridFunction.constant(GridSpec(1, 2), 1)
    with pytest.raises(EmptyRegion):
        restrict(f, CellSet.empty(f.spec))


def test_enumeration_examples():
    assert len(enumerate_regions("dyadic", GridSpec(1, 1))) == 3
    assert len(enumerate_regions("dyadic", GridSpec(2, 1))) == 5
    regions = enumerate_regions("cubes", GridSpec(1, 2))
    assert len(regions) == 10
    assert [r.side for r in regions] == [4, 3, 3, 2, 2, 2, 1, 1, 1, 1]
    with pytest.raises(DimMismatch):
        enumerate_regions("intervals", GridSpec(2, 1))
    with pytest.raises(UnsupportedKind):
        enumerate_regions("convex_bodies", GridSpec(1, 1))


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("refine", [0, 1])
def test_cube_count_closed_form(spec, refine):
    n = 1 << (spec.level + refine)
    expected = sum((n - k + 1) ** spec.dim for k in range(1, n + 1))
    assert len(enumerate_regions("cubes", spec, refine)) == expected


@pytest.mark.parametrize("spec", SPECS)
def test_dyadic_count_closed_form(spec):
    regions = enumerate_regions("dyadic", spec)
    assert len(regions) == sum(2 ** (spec.dim * j) for j in range(spec.level + 1))
    assert all(r.is_dyadic() for r in regions)


@pytest.mark.parametrize("spec", [GridSpec(1, 2), GridSpec(2, 1), GridSpec(2, 2)])
def test_special_rectangles_are_false_cubes(spec):
    regions = enumerate_regions("special_rectangles", spec)
    keys = {region_key(r) for r in regions}
    assert len(keys) == len(regions)
    for r in regions:
        m = min(r.sides)
        assert all(s in (m, 2 * m) for s in r.sides)
        assert contains(unit_cube(spec.dim), r)
    if spec.dim == 1:
        # every interval of length m or 2m... in one dimension every interval qualifies
        assert len(regions) == len(enumerate_regions("cubes", spec))


def test_special_rectangle_validation():
    with pytest.raises(PreconditionError):
        SpecialRectangle(2, (0, 0), (1, 3))
    with pytest.raises(PreconditionError):
        SpecialRectangle(1, (1, 0), (2, 1))


def test_axis_cube_inside_unit_cube():
    with pytest.raises(PreconditionError):
        AxisCube(1, (1,), 2)


@given(st.data())
def test_set_algebra_inclusion_exclusion(data):
    spec = data.draw(st.sampled_from(SPECS))
    a, b = data.draw(cell_sets(spec)), data.draw(cell_sets(spec))
    assert measure(a | b) + measure(a & b) == measure(a) + measure(b)
    assert measure(a.complement()) == 1 - measure(a)
    assert CellSet.from_hex(spec, a.to_hex()) == a


@given(st.data())
def test_restrict_weights_match_geometry(data):
    f = data.draw(grid_functions())
    cube = data.draw(cubes_in(f.spec, 2))
    pairs = restrict(f, cube)
    assert all(w > 0 for _, w in pairs)
    assert sum(w for _, w in pairs) == cube.measure
    # merge the oracle's per-cell weights by value
    merged = {}
    for v, w in cell_pairs(f, cube):
        merged[v] = merged.get(v, 0) + w
    assert dict(pairs) == merged


@given(st.data())
def test_region_cells_agree_with_cellset_measure(data):
    spec = data.draw(st.sampled_from(SPECS))
    E = data.draw(cell_sets(spec))
    cube = data.draw(cubes_in(spec, 1))
    cells, scale = region_cells(spec, cube)
    assert Fraction(sum(w for i, w in cells if i in E), scale) == E.measure_in(cube)


def test_coords_roundtrip():
    for spec in SPECS:
        for i in range(spec.cell_count):
            assert spec.index(spec.coords(i)) == i


def test_kind_parse_aliases():
    assert CollectionKind.parse("dyadic-cubes") is CollectionKind.DYADIC_CUBES
    assert CollectionKind.parse("Intervals") is CollectionKind.INTERVALS
