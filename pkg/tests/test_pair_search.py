import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from bmolab import AxisCube, GridSpec, JsPair, best_balanced_region, frontier_search, minimality_scan, question_b_experiment
from bmolab.errors import BudgetExceeded, DegenerateSet, DimMismatch, PreconditionError
from bmolab.grid_core import CellSet
from bmolab.pair_search import (
    best_balanced_naive,
    config_score,
    decode_config,
    defect_by_level,
    discretize_intervals,
    encode_config,
    implied_s,
    reflect_config,
)
from bmolab.surd import SQRT2_MINUS_1, THREE_MINUS_2SQRT2

from oracles import cell_sets


def interval_score(labels):
    """Best min fraction over integer sub-intervals, with plain Fractions."""
    n = len(labels)
    best = Fraction(0)
    for a in range(n):
        for b in range(a + 1, n + 1):
            seg = labels[a:b]
            best = max(best, Fraction(min(seg.count(1), seg.count(2)), b - a))
    return best


def feasible_sqrt2(labels):
    p, m = labels.count(1), labels.count(2)
    g = len(labels) - p - m
    k = min(p, m)
    return k > 0 and (k + g) ** 2 > 2 * g * g


def oracle_frontier(L):
    n = 1 << L
    scores = [interval_score(list(lab)) for lab in product((0, 1, 2), repeat=n) if feasible_sqrt2(list(lab))]
    return len(scores), min(scores)


def test_best_balanced_examples():
    spec = GridSpec(1, 3)
    left, right = CellSet.from_cells(spec, range(4)), CellSet.from_cells(spec, range(4, 8))
    assert best_balanced_region(left, right)[1] == Fraction(1, 2)
    W, v = best_balanced_region(CellSet.from_cells(spec, [2]), CellSet.from_cells(spec, [3]))
    assert v == Fraction(1, 2) and W == AxisCube(3, (2,), 2)
    with pytest.raises(DegenerateSet):
        best_balanced_region(CellSet.empty(spec), right)
    with pytest.raises(PreconditionError):
        best_balanced_region(left, left)
    with pytest.raises(DimMismatch):
        best_balanced_region(left, CellSet.from_cells(GridSpec(2, 1), [0]))


@given(st.data())
def test_best_balanced_matches_naive(data):
    spec = data.draw(st.sampled_from([GridSpec(1, 3), GridSpec(2, 2)]))
    a = data.draw(cell_sets(spec))
    b = data.draw(cell_sets(spec)) - a
    if not a.bits or not b.bits:
        return
    kind = data.draw(st.sampled_from(["cubes", "dyadic", "special_rectangles"]))
    refine = data.draw(st.integers(0, 1)) if kind != "dyadic" else 0
    assert best_balanced_region(a, b, kind, refine) == best_balanced_naive(a, b, kind, refine)


def test_config_codec():
    for idx in (0, 1, 5, 80):
        assert encode_config(decode_config(idx, 4)) == idx
    assert decode_config(5, 4) == [2, 1, 0, 0]
    spec = GridSpec(2, 1)
    assert reflect_config([1, 2, 0, 0], spec, 0) == [0, 0, 1, 2]
    assert reflect_config([1, 2, 0, 0], spec, 1) == [2, 1, 0, 0]


def test_js_pair_validation():
    JsPair(SQRT2_MINUS_1, THREE_MINUS_2SQRT2 / 2, "certified")
    with pytest.raises(PreconditionError):
        JsPair(Fraction(1, 4), Fraction(3, 4), "certified")
    with pytest.raises(PreconditionError):
        JsPair(Fraction(1, 4), Fraction(1, 4), "guess")


@pytest.mark.parametrize("L", [2, 3])
def test_exhaustive_frontier_matches_oracle(L):
    rep = frontier_search(SQRT2_MINUS_1, 1, L, "cubes", budget=10**5, workers=1)
    feasible, s_hat = oracle_frontier(L)
    assert rep.examined == 3 ** (1 << L)
    assert (rep.feasible, rep.s_hat) == (feasible, s_hat) == ((50, Fraction(1, 4)) if L == 2 else (4538, Fraction(1, 4)))
    assert rep.certificate_gaps == 0
    assert rep.min_certificate_fraction >= THREE_MINUS_2SQRT2 / 2
    assert config_score(rep.worst_labels, GridSpec(1, L))[1] == rep.s_hat


def test_frontier_reflection_invariance():
    spec = GridSpec(1, 3)
    rep = frontier_search(SQRT2_MINUS_1, 1, 3, workers=1)
    mirrored = reflect_config(rep.worst_labels, spec)
    assert config_score(mirrored, spec)[1] == rep.s_hat
    # every configuration scores the same as its mirror image
    for idx in range(0, 3**8, 97):
        lab = decode_config(idx, 8)
        assert config_score(lab, spec)[1] == config_score(reflect_config(lab, spec), spec)[1]


def test_frontier_d2_L1_and_vacuous():
    rep = frontier_search(SQRT2_MINUS_1, 2, 1, workers=1)
    assert rep.s_hat == Fraction(1, 4) and not rep.vacuous
    # a single cell cannot hold both E+ and E-
    vac = frontier_search(Fraction(49, 100), 1, 0, workers=1)
    assert vac.vacuous and vac.feasible == 0 and vac.s_hat == Fraction(1, 2)


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        frontier_search(SQRT2_MINUS_1, 2, 2, budget=1000)


def test_nonstrict_admits_more():
    strict = frontier_search(Fraction(1, 3), 1, 2, workers=1)
    loose = frontier_search(Fraction(1, 3), 1, 2, workers=1, nonstrict=True)
    assert loose.feasible > strict.feasible
    assert loose.s_hat <= strict.s_hat


def test_determinism_across_workers_and_resume(tmp_path):
    args = dict(tau=SQRT2_MINUS_1, d=1, L=3, workers=1, shard_size=243)
    one = json.dumps(frontier_search(**args).as_dict(), sort_keys=True)
    four = json.dumps(frontier_search(**{**args, "workers": 4}).as_dict(), sort_keys=True)
    assert one == four
    ck = tmp_path / "ck.json"
    part = frontier_search(**args, checkpoint=ck, max_shards=3)
    assert part.extra["complete"] is False
    resumed = frontier_search(**args, checkpoint=ck)
    assert json.dumps(resumed.as_dict(), sort_keys=True) == one


def test_anneal_reproducible():
    args = dict(tau=SQRT2_MINUS_1, d=2, L=2, strategy="anneal", budget=2000, seed=7)
    a = frontier_search(**args, workers=1).as_dict()
    b = frontier_search(**args, workers=2).as_dict()
    assert a == b
    assert a["extra"]["upper_bound"] is True
    assert Fraction(a["s_hat"]) >= Fraction(a["min_certificate_fraction"]) or a["certificate_gaps"] == 1
    with pytest.raises(PreconditionError):
        frontier_search(SQRT2_MINUS_1, 1, 2, strategy="anneal")


def test_implied_s():
    assert implied_s(Fraction(3, 10)) == Fraction(3, 16) == Fraction(1875, 10000)


def test_minimality_examples():
    spec = GridSpec(1, 2)
    Fp, Fm = CellSet.from_cells(spec, [0]), CellSet.from_cells(spec, [3])
    rep = minimality_scan(Fp, Fm, Fraction(3, 10), refine=2)
    assert rep.good and not rep.minimal
    assert rep.plus == Fraction(1, 4) and rep.rest_term == Fraction(3, 20)
    assert rep.witness is not None and rep.witness.measure < 1
    halves = minimality_scan(CellSet.from_cells(spec, [0, 1]), CellSet.from_cells(spec, [2, 3]), Fraction(3, 10))
    assert halves.exceptional and not halves.good
    assert halves.balancing_fractions == (Fraction(1, 2), Fraction(1, 2))
    none = minimality_scan(Fp, CellSet.empty(spec), Fraction(3, 10))
    assert not none.good and not none.exceptional


@given(st.data())
def test_minimality_flags_are_consistent(data):
    spec = data.draw(st.sampled_from([GridSpec(1, 3), GridSpec(1, 4), GridSpec(2, 2)]))
    Fp = data.draw(cell_sets(spec))
    Fm = data.draw(cell_sets(spec)) - Fp
    tp = data.draw(st.sampled_from([Fraction(1, 5), Fraction(3, 10), Fraction(2, 5)]))
    rep = minimality_scan(Fp, Fm, tp)
    g = 1 - rep.plus - rep.minus
    assert rep.good == (rep.plus > 0 and rep.minus > 0 and g > 0 and min(rep.plus, rep.minus) >= tp * g)
    assert rep.exceptional == (rep.plus > 0 and rep.minus > 0 and g == 0)
    assert not (rep.good and rep.exceptional)
    assert rep.fap_holds
    if rep.witness is not None:
        w = minimality_scan(Fp, Fm, tp, V=rep.witness)
        assert w.good or w.exceptional
        if w.good:
            assert w.minimal
    if rep.balancing is not None:
        for x in rep.balancing_fractions:
            assert abs(x - Fraction(1, 2)) <= rep.balancing_tolerance


def test_question_b_one_dimension():
    out = question_b_experiment(1, 6, Fraction(3, 10), 100, 0)
    assert out["minimal_count"] + out["exceptional_count"] == 100
    assert out["minimal_count"] > 0
    assert out["defect_within_one_cell"]
    assert out["implied_s"] == "3/16"
    assert out == question_b_experiment(1, 6, Fraction(3, 10), 100, 0)


def test_question_b_two_dimensions_reproducible():
    a = question_b_experiment(2, 3, Fraction(3, 10), 10, 5)
    assert a == question_b_experiment(2, 3, Fraction(3, 10), 10, 5)
    with pytest.raises(PreconditionError):
        question_b_experiment(3, 1, Fraction(3, 10), 1, 0)


def test_defect_vanishes_on_continuum_instance():
    plus, minus = [(Fraction(1, 10), Fraction(37, 100))], [(Fraction(2, 3), Fraction(95, 100))]
    rows = defect_by_level(plus, minus, Fraction(3, 10), range(3, 8))
    assert all(r["outcome"] == "minimal" for r in rows)
    d = [r["defect"] for r in rows]
    assert all(a >= b for a, b in zip(d, d[1:])) and d[-1] == 0
    assert discretize_intervals([(0, Fraction(1, 2))], 2).measure() == Fraction(1, 2)
