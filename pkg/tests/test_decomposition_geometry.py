import random
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bmolab import (
    DYADIC,
    FALSE_CUBE,
    CellSet,
    GridSpec,
    TriPartition,
    bidensity_continuous,
    bidensity_multilevel,
    certified_pair,
    certified_s,
    chain_descent,
    enumerate_regions,
    unit_cube,
)
from bmolab.decomposition_geometry import bidensity_constant, bidensity_dyadic, continuous_tolerance, fraction_in
from bmolab.errors import DegenerateSet, HypothesisViolated, PreconditionError
from bmolab.surd import SQRT2_MINUS_1, THREE_MINUS_2SQRT2, Surd

from oracles import SPECS, all_cubes, cell_sets

getcontext().prec = 50
R2 = Decimal(2).sqrt()


def dec(x: Surd) -> Decimal:
    x = Surd.coerce(x)
    return Decimal(x.a.numerator) / x.a.denominator + Decimal(x.b.numerator) / x.b.denominator * R2


def best_min_fraction(part: TriPartition, regions):
    return max(min(fraction_in(part.plus, W), fraction_in(part.minus, W)) for W in regions)


def test_children_partition_parent():
    for rule, root in ((DYADIC, unit_cube(2)), (FALSE_CUBE, FALSE_CUBE.root(2))):
        kids = rule.children(root)
        assert len(kids) == rule.multiplicity(2)
        assert sum(k.measure for k in kids) == root.measure
        assert len({k.measure for k in kids}) == 1
    fc = FALSE_CUBE.children(FALSE_CUBE.children(unit_cube(2))[0])
    assert all(min(k.sides) * 2 in (max(k.sides), 2 * min(k.sides)) for k in fc)


def test_bidensity_dyadic_examples():
    spec = GridSpec(1, 4)
    left = CellSet.from_cells(spec, range(8))
    W = bidensity_dyadic(left, unit_cube(1))
    assert W == unit_cube(1) and fraction_in(left, W) == Fraction(1, 2)
    one = CellSet.from_cells(spec, [5])
    W = bidensity_dyadic(one, unit_cube(1))
    q = fraction_in(one, W)
    assert min(q, 1 - q) >= Fraction(1, 4)
    with pytest.raises(DegenerateSet):
        bidensity_dyadic(CellSet.full(spec), unit_cube(1))


@given(st.data())
def test_bidensity_guarantee(data):
    spec = data.draw(st.sampled_from(SPECS))
    E = data.draw(cell_sets(spec))
    if E.measure() in (0, 1):
        return
    for rule in (DYADIC, FALSE_CUBE):
        W = bidensity_multilevel(E, rule.root(spec.dim), rule)
        q = fraction_in(E, W)
        assert min(q, 1 - q) >= bidensity_constant(rule, spec.dim)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_dyadic_bidensity_sandwich(d):
    spec = GridSpec(d, 1)
    child = CellSet.from_cells(spec, [0])
    best = max(min(fraction_in(child, W), 1 - fraction_in(child, W)) for W in enumerate_regions("dyadic", spec))
    lower = Fraction(1, 2**d) * (1 - Fraction(1, 2**d))
    assert best == Fraction(1, 2**d)
    assert lower <= bidensity_constant(DYADIC, d) <= best


def test_bidensity_continuous_examples():
    spec = GridSpec(1, 3)
    left = CellSet.from_cells(spec, range(4))
    W = bidensity_continuous(left, unit_cube(1), Fraction(1, 2), refine=1)
    assert fraction_in(left, W) == Fraction(1, 2)
    quad = CellSet.from_cells(GridSpec(2, 1), [0])
    W = bidensity_continuous(quad, unit_cube(2), Fraction(1, 2), refine=2)
    assert abs(fraction_in(quad, W) - Fraction(1, 2)) <= continuous_tolerance(W.side, 2)
    assert bidensity_continuous(quad, unit_cube(2), Fraction(1, 4)) == unit_cube(2)
    with pytest.raises(DegenerateSet):
        bidensity_continuous(CellSet.empty(spec), unit_cube(1), Fraction(1, 2))


@given(st.data())
def test_bidensity_continuous_tolerance(data):
    spec = data.draw(st.sampled_from([GridSpec(1, 3), GridSpec(2, 2)]))
    E = data.draw(cell_sets(spec))
    if E.measure() in (0, 1):
        return
    s = data.draw(st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)]))
    R = data.draw(st.integers(0, 1))
    W = bidensity_continuous(E, unit_cube(spec.dim), s, R)
    assert abs(fraction_in(E, W) - s) <= continuous_tolerance(W.side, spec.dim)


def test_certified_constants_to_full_precision():
    tau, s1 = certified_pair(1)
    assert tau == SQRT2_MINUS_1 and s1 == THREE_MINUS_2SQRT2 / 2
    assert abs(dec(s1) - (3 - 2 * R2) / 2) < Decimal(10) ** -45
    _, s2 = certified_pair(2, "dyadic")
    assert abs(dec(s2) - (3 - 2 * R2) / 4) < Decimal(10) ** -45
    assert round(float(s2), 5) == 0.04289
    for d in (1, 2, 5):
        assert certified_pair(d, "special_rectangles")[1] == THREE_MINUS_2SQRT2 / 2
    assert certified_pair(3, "intervals") == certified_pair(1, "cubes")


def test_certified_s_formula():
    tau = Fraction(1, 5)
    assert certified_s(tau, 2, Fraction(1, 4)) == (tau - tau * tau) / (2 * (1 + tau))
    assert certified_s(Fraction(9, 20), 2, Fraction(1, 4)) == THREE_MINUS_2SQRT2 / 2
    assert certified_s(Fraction(1, 5), 8, Fraction(1, 1000)) == Fraction(1, 1000)
    for M in (2, 4, 8):
        assert Surd.coerce(certified_s(SQRT2_MINUS_1, M, Fraction(1, 2))) <= Fraction(1, 2)


def test_chain_descent_example():
    spec = GridSpec(1, 4)
    part = TriPartition.from_labels(spec, [1] * 6 + [0] * 4 + [2] * 6)
    cert = chain_descent(part)
    assert cert.s == THREE_MINUS_2SQRT2 / 2
    assert cert.min_fraction >= cert.s and cert.recheck(part)
    assert best_min_fraction(part, all_cubes(spec)) >= cert.min_fraction


def test_chain_descent_pure_bidensity_and_errors():
    spec = GridSpec(2, 2)
    halves = TriPartition.from_labels(spec, [1 if spec.coords(i)[0] < 2 else 2 for i in range(16)])
    cert = chain_descent(halves)
    assert cert.case == "bidensity"
    assert cert.min_fraction >= bidensity_constant(DYADIC, 2)
    empty_plus = TriPartition.from_labels(spec, [2] * 8 + [0] * 8)
    with pytest.raises(HypothesisViolated):
        chain_descent(empty_plus)
    with pytest.raises(PreconditionError):
        chain_descent(halves, tau=0)


def test_tau_above_threshold_is_clamped():
    spec = GridSpec(1, 3)
    part = TriPartition.from_labels(spec, [1, 1, 1, 0, 2, 2, 2, 0])
    assert chain_descent(part, tau=Fraction(2, 5)).tau == Fraction(2, 5)
    assert chain_descent(part, tau=Fraction(9, 20)).tau == SQRT2_MINUS_1


def random_admissible(rng, spec, tau):
    while True:
        w = [rng.random() for _ in range(3)]
        lab = rng.choices((0, 1, 2), weights=w, k=spec.cell_count)
        p, m = lab.count(1), lab.count(2)
        g = spec.cell_count - p - m
        if Surd(min(p, m)) > Surd.coerce(tau) * g:
            return TriPartition.from_labels(spec, lab)


@pytest.mark.parametrize("spec", [GridSpec(1, 4), GridSpec(2, 2), GridSpec(3, 1), GridSpec(2, 3)])
def test_chain_descent_certificates_recheck(spec):
    rng = random.Random(spec.dim * 10 + spec.level)
    for rule in (DYADIC, FALSE_CUBE):
        for _ in range(40):
            part = random_admissible(rng, spec, SQRT2_MINUS_1)
            cert = chain_descent(part, rule)
            assert cert.recheck(part)
            assert cert.depth <= spec.level * (spec.dim if rule is FALSE_CUBE else 1) + 1
            assert Surd.coerce(cert.s) <= Fraction(1, 2)
