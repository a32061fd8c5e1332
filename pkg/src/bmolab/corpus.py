"""Seeded generators for grid functions and three-set partitions."""

from __future__ import annotations

import random
from fractions import Fraction

from .decomposition_geometry import TriPartition
from .grid_core import GridFunction, GridSpec
from .surd import Surd

__all__ = [
    "random_function",
    "function_corpus",
    "tripartition_corpus",
    "block_partitions",
    "admissible",
]


def random_function(rng: random.Random, spec: GridSpec, max_value: int = 5, integer: bool = True) -> GridFunction:
    if integer:
        vals = tuple(Fraction(rng.randint(0, max_value)) for _ in range(spec.cell_count))
    else:
        vals = tuple(Fraction(rng.randint(-4 * max_value, 4 * max_value), 4) for _ in range(spec.cell_count))
    return GridFunction(spec, vals, integer)


def _structured(rng: random.Random, spec: GridSpec, max_value: int):
    n = spec.cell_count
    side = spec.side_cells
    yield GridFunction.constant(spec, rng.randint(0, max_value))
    picked = rng.sample(range(n), rng.randint(1, n))
    yield GridFunction(spec, tuple(Fraction(int(i in picked)) for i in range(n)), True)
    spike = rng.randrange(n)
    yield GridFunction(spec, tuple(Fraction(max_value if i == spike else 0) for i in range(n)), True)
    # distance to a corner, coarsened by powers of two
    yield GridFunction.from_callable(
        spec, lambda c: Fraction(max(0, max_value - max(x for x in c).bit_length()))
    )
    yield GridFunction.from_callable(spec, lambda c: Fraction(sum(c) * max_value, max(1, spec.dim * (side - 1))))


def function_corpus(d: int, L: int, count: int, seed: int, max_value: int = 5, integer: bool = True) -> list[GridFunction]:
    """Structured functions first, then random ones, ``count`` in total."""
    spec = GridSpec(d, L)
    rng = random.Random(seed)
    out = [
        GridFunction(f.spec, f.values, all(v.denominator == 1 for v in f.values))
        for f in list(_structured(rng, spec, max_value))[:count]
    ]
    while len(out) < count:
        out.append(random_function(rng, spec, max_value, integer))
    return out


def admissible(labels, tau, nonstrict: bool = False) -> bool:
    p, m = labels.count(1), labels.count(2)
    g = len(labels) - p - m
    lhs, rhs = Surd(min(p, m)), Surd.coerce(tau) * g
    return lhs >= rhs if nonstrict else lhs > rhs


def block_partitions(L: int, tau):
    """Admissible labelings of a 1-d grid by at most three contiguous blocks plus a ``G`` tail."""
    n = 1 << L
    spec = GridSpec(1, L)
    seen = set()
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            for c in range(b, n + 1):
                for lo, mid, hi in ((1, 0, 2), (1, 2, 0), (0, 1, 2), (2, 0, 1)):
                    lab = [lo] * a + [mid] * (b - a) + [hi] * (c - b) + [0] * (n - c)
                    key = tuple(lab)
                    if key in seen or not admissible(lab, tau):
                        continue
                    seen.add(key)
                    yield TriPartition.from_labels(spec, lab)


def tripartition_corpus(d: int, L: int, count: int, seed: int, tau, include_blocks: bool = True) -> list[TriPartition]:
    """``count`` random admissible partitions; in one dimension also the ``count`` tightest block partitions."""
    spec = GridSpec(d, L)
    rng = random.Random(seed)
    out = []
    if include_blocks and d == 1:
        t = float(Surd.coerce(tau))
        blocks = sorted(
            block_partitions(L, tau),
            key=lambda p: (min(len(p.plus), len(p.minus)) - t * len(p.rest), p.plus.bits, p.minus.bits),
        )
        out = blocks[:count]
    target = len(out) + count
    n = spec.cell_count
    while len(out) < target:
        weights = [rng.random() for _ in range(3)]
        lab = rng.choices((0, 1, 2), weights=weights, k=n)
        if admissible(lab, tau):
            out.append(TriPartition.from_labels(spec, lab))
    return out
