from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bmolab import AxisCube, GridFunction, GridSpec, StepFunction, j_functional_def, j_functional_rearr, j_seminorm
from bmolab.errors import GridIncompatible, LipschitzViolation, NegativeValues, PreconditionError
from bmolab.john_stromberg import (
    affine_covariance_check,
    chebyshev_bound_check,
    difference_tail_bound,
    interval_j_grid,
    interval_j_seminorm,
    lipschitz_j_check,
    monotone_difference_bound,
    monotone_tail_bound,
    staircase,
)
from bmolab.lipschitz import PiecewiseLinear, clamp, identity, positive_part
from bmolab.oscillation_median import bmo_seminorm, median

from oracles import cell_pairs, function_and_cube, grid_functions, j_oracle

S_VALUES = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(7, 8)]
STAIR = staircase(Fraction(1, 4))


def clipped_pairs(h: StepFunction, a, b):
    out = []
    for (lo, hi), v in zip(zip(h.breaks, h.breaks[1:]), h.values):
        w = min(hi, b) - max(lo, a)
        if w > 0:
            out.append((v, w))
    return out


def test_staircase_fixture():
    assert STAIR.pieces() == [(Fraction(1, 4), v) for v in (4, 3, 2, 1)]
    assert j_functional_rearr(STAIR, s=Fraction(1, 2)) == 1
    assert j_functional_rearr(STAIR, s=Fraction(4, 5)) == 0
    # dense sampling of u with window length 1/2
    dense = min(STAIR(Fraction(k, 512)) - STAIR(Fraction(k, 512) + Fraction(1, 2)) for k in range(1, 256)) / 2
    assert dense == 1


def test_staircase_strict_threshold():
    # s = 3/4: one quarter carries exactly 1/4, which is not strictly more
    assert j_functional_def(STAIR, s=Fraction(3, 4)) == Fraction(1, 2)
    assert j_functional_def(STAIR, s=Fraction(3, 4) + Fraction(1, 1000)) == 0


def test_j_examples():
    spec = GridSpec(1, 2)
    assert j_functional_def(GridFunction.constant(spec, 2), s=Fraction(1, 3)) == 0
    two = GridFunction(spec, (5, 5, 1, 1))
    assert j_functional_def(two, s=Fraction(1, 2)) == 2
    ramp = GridFunction(spec, (0, 1, 2, 3))
    # weight above 3/4 needs all four values
    assert j_functional_def(ramp, s=Fraction(1, 4)) == Fraction(3, 2)
    assert j_oracle(cell_pairs(ramp), Fraction(1, 4)) == Fraction(3, 2)
    with pytest.raises(NegativeValues):
        j_functional_rearr(GridFunction(spec, (-1, 0, 0, 0)))
    with pytest.raises(PreconditionError):
        j_functional_def(ramp, s=1)


@given(function_and_cube(max_refine=2), st.sampled_from(S_VALUES))
def test_window_definition_matches_oracle(fc, s):
    f, cube = fc
    assert j_functional_def(f, cube, s) == j_oracle(cell_pairs(f, cube), s)


@given(function_and_cube(nonneg=True, max_refine=2), st.sampled_from(S_VALUES))
def test_two_routes_agree(fc, s):
    f, cube = fc
    assert j_functional_def(f, cube, s) == j_functional_rearr(f, cube, s)


@given(function_and_cube(), st.sampled_from(S_VALUES), st.fractions(-5, 5, max_denominator=8), st.fractions(-3, 3, max_denominator=4))
def test_shift_and_homogeneity(fc, s, c, r):
    f, cube = fc
    base = j_functional_def(f, cube, s)
    assert j_functional_def(f.map(lambda v: v + c), cube, s) == base
    assert j_functional_def(f.scale(r), cube, s) == abs(r) * base


@given(function_and_cube())
def test_monotone_in_s(fc):
    f, cube = fc
    vals = [j_functional_def(f, cube, s) for s in S_VALUES]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_left_continuity_at_staircase_breakpoints():
    for a in (Fraction(1, 4), Fraction(1, 3), Fraction(2, 5)):
        h = staircase(a)
        for k in range(1, 4):
            s0 = 1 - k * a
            if not 0 < s0 < 1:
                continue
            eps = Fraction(1, 10**6)
            assert j_functional_def(h, s=s0 - eps) == j_functional_def(h, s=s0)


@given(grid_functions(specs=[GridSpec(1, 2), GridSpec(2, 1)]), st.sampled_from(S_VALUES), st.fractions(-3, 3, max_denominator=4))
def test_seminorm_homogeneity(f, s, r):
    assert j_seminorm(f.scale(r), "cubes", s) == abs(r) * j_seminorm(f, "cubes", s)


@given(grid_functions(specs=[GridSpec(1, 3), GridSpec(2, 1)], denominators=(1,), lo=0), st.sampled_from(S_VALUES))
def test_integer_seminorm_is_half_integer(f, s):
    assert (2 * j_seminorm(f, "cubes", s)).denominator == 1


@given(grid_functions(specs=[GridSpec(1, 2), GridSpec(1, 3), GridSpec(2, 1)]), st.sampled_from(S_VALUES[:4]))
def test_chebyshev_bound(f, s):
    chk = chebyshev_bound_check(f, "cubes", s)
    assert chk.passed
    assert s * chk.lhs <= bmo_seminorm(f, "cubes", "O")


def test_chebyshev_examples():
    spec = GridSpec(1, 4)
    assert chebyshev_bound_check(GridFunction.constant(spec, 1)).slack == 0
    ind = GridFunction(spec, tuple(1 if i < 5 else 0 for i in range(16)))
    assert chebyshev_bound_check(ind, "intervals", Fraction(1, 4)).slack >= 0
    with pytest.raises(PreconditionError):
        chebyshev_bound_check(ind, "cubes", Fraction(3, 4))


@given(function_and_cube(), st.sampled_from(S_VALUES))
def test_lipschitz_contraction(fc, s):
    f, cube = fc
    m = median(f, cube).m
    for phi in (identity(), positive_part(), clamp(-1, 1)):
        g = f.map(lambda v: v - m)
        assert lipschitz_j_check(g, phi, cube, s).passed
    assert lipschitz_j_check(f, identity(), cube, s).slack == 0


def test_lipschitz_table_is_validated():
    with pytest.raises(LipschitzViolation):
        PiecewiseLinear((0, 1), (0, 2))


@pytest.mark.parametrize(
    "r,x0,E",
    [
        (1, Fraction(1, 8), AxisCube(3, (0,), 4)),
        (2, 0, AxisCube(1, (0,), 1)),
        (-1, 1, AxisCube(0, (0,), 1)),
        (Fraction(1, 2), Fraction(1, 4), AxisCube(2, (1,), 2)),
    ],
)
def test_affine_covariance_1d(r, x0, E):
    f = GridFunction(GridSpec(1, 2), (3, 1, 4, 1))
    for s in S_VALUES:
        assert affine_covariance_check(f, r, x0, E, s).passed


def test_affine_covariance_2d_and_errors():
    f = GridFunction(GridSpec(2, 1), (0, 2, 5, 1))
    assert affine_covariance_check(f, -1, (1, 1), AxisCube(0, (0, 0), 1), Fraction(1, 3)).passed
    with pytest.raises(GridIncompatible):
        affine_covariance_check(f, Fraction(1, 3), (0, 0), AxisCube(0, (0, 0), 1))
    with pytest.raises(PreconditionError):
        affine_covariance_check(f, 2, (0, 0), AxisCube(0, (0, 0), 1))


@pytest.mark.parametrize("levels", [(4, 3, 2, 1), (2, 0), (5, 4, 4, 0), (3, 3, 1, 0, 0, 0, 0, 0)])
@pytest.mark.parametrize("s", [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)])
def test_interval_seminorm_against_dense_search(levels, s):
    f = GridFunction(GridSpec(1, 2 if len(levels) == 4 else (1 if len(levels) == 2 else 3)), levels)
    from bmolab import rearrange

    h = rearrange(f)
    value, (a, ell) = interval_j_seminorm(h, s)
    assert interval_j_grid(h, s, 4) <= value
    # every arrangement vertex lies on this grid for the s values used here
    n = 3 * 8 * len(levels)
    pts = [Fraction(k, n) for k in range(n + 1)]
    dense = max(j_oracle(clipped_pairs(h, x, y), s) for i, x in enumerate(pts) for y in pts[i + 1:])
    assert value == dense
    assert j_oracle(clipped_pairs(h, a, a + ell), s) == value


def test_monotone_difference_bound_examples():
    const = StepFunction.from_pieces([(1, 2)])
    assert monotone_difference_bound(const, Fraction(1, 4)) == (0, 0)
    lhs, rhs = monotone_difference_bound(STAIR, Fraction(1, 4))
    assert lhs <= rhs
    two = StepFunction.from_pieces([(Fraction(3, 8), 3), (Fraction(5, 8), 1)])
    lhs, rhs = monotone_difference_bound(two, Fraction(1, 3))
    assert lhs <= rhs


@given(grid_functions(specs=[GridSpec(1, 3)], nonneg=True), st.sampled_from([Fraction(1, 8), Fraction(1, 4), Fraction(1, 3)]))
def test_monotone_difference_bound_property(f, s):
    from bmolab import rearrange

    lhs, rhs = monotone_difference_bound(rearrange(f), s)
    assert lhs <= rhs


def test_monotone_tail_examples():
    const = StepFunction.from_pieces([(1, 2)])
    rep = monotone_tail_bound(const, Fraction(1, 4), alphas=[Fraction(1, 2), 1])
    assert rep.passed and all(r.lhs == 0 for r in rep.rows)
    rep = monotone_tail_bound(STAIR, Fraction(1, 2), alphas=[Fraction(1, 2), 1, 2])
    # log(1/s - 1) = 0 at s = 1/2, so the bound is the constant 1/2: tight at alpha = 1/2 and 1
    assert rep.passed and [r.slack for r in rep.rows] == [0.0, 0.0, 0.25]
    # alpha = 0 at s = 1/2: {h >= h(1/2)} has measure 3/4 > (1-s)/(2s) = 1/2
    rep0 = monotone_tail_bound(STAIR, Fraction(1, 2), alphas=[0])
    assert rep0.rows[0].lhs == Fraction(3, 4) and not rep0.passed
    assert monotone_tail_bound(STAIR, Fraction(1, 3), alphas=[0]).passed


@given(grid_functions(specs=[GridSpec(1, 3)], nonneg=True), st.sampled_from([Fraction(1, 8), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)]))
def test_tail_bounds_hold(f, s):
    from bmolab import rearrange

    h = rearrange(f)
    assert monotone_tail_bound(h, s).passed
    if s < Fraction(1, 2):
        assert difference_tail_bound(h, s).passed
