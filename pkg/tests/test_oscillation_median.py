from fractions import Fraction

import pytest
from hypothesis import given

from bmolab import GridFunction, GridSpec, bmo_seminorm, median, oscillation
from bmolab.errors import PreconditionError
from bmolab.lipschitz import clamp, positive_part
from bmolab.oscillation_median import deviation_integral, median_vs_mean_gap
from bmolab.grid_core import sample

from oracles import cell_pairs, function_and_cube, grid_functions, osc_oracle


def indicator(k, L=4):
    spec = GridSpec(1, L)
    return GridFunction(spec, tuple(1 if i < k else 0 for i in range(spec.cell_count)))


def test_median_examples():
    m = median(GridFunction.constant(GridSpec(1, 2), 5))
    assert (m.lo, m.hi, m.m) == (5, 5, 5)
    m = median(indicator(5))
    assert (m.lo, m.hi) == (0, 0)
    m = median(indicator(8))
    assert (m.lo, m.hi, m.m) == (0, 1, 0)


def test_oscillation_examples():
    r = oscillation(GridFunction.constant(GridSpec(2, 2), 7))
    assert (r.O, r.A, r.D) == (0, 0, 0)
    p = Fraction(5, 16)
    r = oscillation(indicator(5))
    assert r.O == p and r.A == r.D == 2 * p * (1 - p)
    assert median_vs_mean_gap(indicator(5)) == p


def test_seminorm_examples():
    f = indicator(8)
    assert bmo_seminorm(f, "intervals", "O") == Fraction(1, 2)
    assert bmo_seminorm(GridFunction.constant(f.spec, 3), "dyadic", "D") == 0
    with pytest.raises(PreconditionError):
        bmo_seminorm(f, "cubes", "J")


@given(function_and_cube(max_refine=2))
def test_functionals_match_brute_force(fc):
    f, cube = fc
    r = oscillation(f, cube)
    assert (r.O, r.A, r.D) == osc_oracle(cell_pairs(f, cube))


@given(function_and_cube())
def test_functional_chain(fc):
    r = oscillation(*fc)
    assert 0 <= r.O <= r.A <= r.D <= 2 * r.O


@given(function_and_cube())
def test_median_set_is_exact(fc):
    f, cube = fc
    pairs = cell_pairs(f, cube)
    lam = sum(w for _, w in pairs)
    m = median(f, cube)

    def is_median(c):
        return sum(w for v, w in pairs if v < c) <= lam / 2 and sum(w for v, w in pairs if v > c) <= lam / 2

    eps = Fraction(1, 1000)
    assert is_median(m.lo) and is_median(m.hi)
    assert not is_median(m.lo - eps) and not is_median(m.hi + eps)
    assert sum(w for v, w in pairs if m.lo < v < m.hi) == 0


@given(function_and_cube())
def test_median_is_optimal(fc):
    f, cube = fc
    ws = sample(f, cube)
    vals = sorted(set(ws.values))
    cands = vals + [(a + b) / 2 for a, b in zip(vals, vals[1:])]
    best = deviation_integral(ws, median(f, cube).m)
    assert all(best <= deviation_integral(ws, c) for c in cands)
    assert median_vs_mean_gap(f, cube) <= oscillation(f, cube).O


@given(grid_functions(specs=[GridSpec(1, 2), GridSpec(2, 1)]))
def test_seminorm_chain_and_lipschitz_contraction(f):
    o, a, d = (bmo_seminorm(f, "cubes", x) for x in "OAD")
    assert o <= a <= d <= 2 * o
    for phi in (positive_part(), clamp(-1, 2)):
        assert bmo_seminorm(f.map(phi), "cubes", "O") <= o
