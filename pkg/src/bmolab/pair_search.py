"""Searches over grid configurations for balancing constants.

* :func:`best_balanced_region` maximises ``min(|E+ cap W|, |E- cap W|) / |W|``
  over a region family.
* :func:`frontier_search` minimises that best score over all (or, with
  annealing, many) labelings of the cells into ``E+``, ``E-`` and ``G``
  that satisfy ``min(|E+|, |E-|) > tau |G|``.
* :func:`minimality_scan` and :func:`question_b_experiment` classify cubes as
  good, exceptional or minimal and measure how far minimal cubes are from
  splitting ``F+`` and ``F-`` evenly.

Exact scores are Fractions.  Region weights are batched through integer
numpy matrices; every float is only a screen ahead of an exact comparison.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .decomposition_geometry import (
    DecompositionSpec,
    TriPartition,
    bidensity_continuous,
    chain_descent,
    certified_pair,
    continuous_tolerance,
    fraction_in,
)
from .errors import BudgetExceeded, DegenerateSet, DimMismatch, PreconditionError
from .grid_core import (
    AxisCube,
    CellSet,
    CollectionKind,
    GridSpec,
    Region,
    enumerate_regions,
    region_cells,
    rescale,
    unit_cube,
)
from .surd import Surd

__all__ = [
    "JsPair",
    "SearchReport",
    "MinimalityReport",
    "RegionTable",
    "region_table",
    "best_balanced_region",
    "best_balanced_naive",
    "config_score",
    "frontier_search",
    "minimality_scan",
    "question_b_experiment",
    "discretize_intervals",
    "defect_by_level",
    "implied_s",
    "decode_config",
    "encode_config",
    "reflect_config",
    "DEFAULT_SHARD",
]

DEFAULT_SHARD = 729


@dataclass(frozen=True)
class JsPair:
    tau: object
    s: object
    provenance: str

    def __post_init__(self):
        if self.provenance not in ("certified", "empirical-lower-bound"):
            raise PreconditionError(f"unknown provenance {self.provenance!r}")
        if Surd.coerce(self.s) > Fraction(1, 2) or Surd.coerce(self.s) <= 0:
            raise PreconditionError("s must lie in (0, 1/2]")


# ---------------------------------------------------------------- region tables


@dataclass(frozen=True)
class RegionTable:
    """Regions of a family with their integer cell weights as one matrix."""

    regions: tuple
    weights: np.ndarray  # (regions, cells) integer overlap weights
    totals: np.ndarray  # row sums
    scale: int
    corners: np.ndarray  # (regions, d) corners at ``level``
    sides: np.ndarray  # (regions, d) sides at ``level``
    level: int

    def __len__(self):
        return len(self.regions)


@lru_cache(maxsize=64)
def region_table(kind, spec: GridSpec, refine: int = 0, within: Region | None = None) -> RegionTable:
    kind = CollectionKind.parse(kind)
    regions = tuple(enumerate_regions(kind, spec, refine, within))
    k = max(spec.level, max(r.level for r in regions))
    scale = 1 << (spec.dim * k)
    mat = np.zeros((len(regions), spec.cell_count), dtype=np.int64)
    for row, r in enumerate(regions):
        cells, sc = region_cells(spec, r)
        mult = scale // sc
        for i, w in cells:
            mat[row, i] = w * mult
    mat.setflags(write=False)
    totals = mat.sum(axis=1)
    totals.setflags(write=False)
    geo = [rescale(r, k) for r in regions]
    corners = np.array([c for c, _ in geo], dtype=np.int64).reshape(len(regions), spec.dim)
    sides = np.array([sd for _, sd in geo], dtype=np.int64).reshape(len(regions), spec.dim)
    return RegionTable(regions, mat, totals, scale, corners, sides, k)


def _indicator(s: CellSet) -> np.ndarray:
    n = s.spec.cell_count
    return np.array([(s.bits >> i) & 1 for i in range(n)], dtype=np.int64)


def _pick_best(table: RegionTable, a: np.ndarray, b: np.ndarray) -> tuple[int, Fraction]:
    """Index and exact value of the best ``min(a, b) / total`` row."""
    num = np.minimum(a, b)
    tot = table.totals
    approx = num / tot
    top = approx.max()
    cand = np.nonzero(approx >= top - 1e-9)[0]
    best_i, best_v = None, None
    for i in cand:
        v = Fraction(int(num[i]), int(tot[i]))
        if best_v is None or v > best_v or (v == best_v and tot[i] > tot[best_i]):
            best_i, best_v = int(i), v
    return best_i, best_v


def best_balanced_region(
    E_plus: CellSet, E_minus: CellSet, kind="cubes", refine: int = 0
) -> tuple[Region, Fraction]:
    """Region maximising ``min(|E+ cap W|, |E- cap W|) / |W|``.

    Ties go to the larger region, then to enumeration order.
    """
    if E_plus.spec != E_minus.spec:
        raise DimMismatch("sets live on different grids")
    if not E_plus.is_disjoint(E_minus):
        raise PreconditionError("E+ and E- must be disjoint")
    if not E_plus.bits or not E_minus.bits:
        raise DegenerateSet("both sets need positive measure")
    table = region_table(CollectionKind.parse(kind), E_plus.spec, refine)
    a = table.weights @ _indicator(E_plus)
    b = table.weights @ _indicator(E_minus)
    i, v = _pick_best(table, a, b)
    return table.regions[i], v


def best_balanced_naive(E_plus: CellSet, E_minus: CellSet, kind="cubes", refine: int = 0):
    """Reference version of :func:`best_balanced_region` through exact per-region measures."""
    best, arg = None, None
    for W in enumerate_regions(kind, E_plus.spec, refine):
        v = min(E_plus.measure_in(W), E_minus.measure_in(W)) / W.measure
        if best is None or v > best or (v == best and W.measure > arg.measure):
            best, arg = v, W
    return arg, best


# ---------------------------------------------------------------- configurations


def decode_config(index: int, n: int) -> list[int]:
    """Base-3 digits, cell 0 least significant: 0 = G, 1 = E+, 2 = E-."""
    out = []
    for _ in range(n):
        index, r = divmod(index, 3)
        out.append(r)
    return out


def encode_config(labels) -> int:
    idx = 0
    for lab in reversed(list(labels)):
        idx = idx * 3 + lab
    return idx


def reflect_config(labels, spec: GridSpec, axis: int = 0) -> list[int]:
    n = spec.side_cells
    out = [0] * spec.cell_count
    for i, lab in enumerate(labels):
        c = list(spec.coords(i))
        c[axis] = n - 1 - c[axis]
        out[spec.index(c)] = lab
    return out


def _feasible(n_plus: int, n_minus: int, n_rest: int, tau: Surd, nonstrict: bool) -> bool:
    lhs = Surd(min(n_plus, n_minus))
    rhs = tau * n_rest
    return lhs >= rhs if nonstrict else lhs > rhs


def config_score(labels, spec: GridSpec, kind="cubes", refine: int = 0) -> tuple[Region, Fraction]:
    lab = np.asarray(labels, dtype=np.int64)
    table = region_table(CollectionKind.parse(kind), spec, refine)
    a = table.weights @ (lab == 1).astype(np.int64)
    b = table.weights @ (lab == 2).astype(np.int64)
    i, v = _pick_best(table, a, b)
    return table.regions[i], v


# ---------------------------------------------------------------- reports


def _region_json(r: Region | None):
    if r is None:
        return None
    return {"type": type(r).__name__, "level": r.level, "corner": list(r.corner), "sides": list(r.sides)}


@dataclass
class SearchReport:
    tau: str
    d: int
    L: int
    refine: int
    kind: str
    strategy: str
    nonstrict: bool
    examined: int
    feasible: int
    s_hat: Fraction
    vacuous: bool
    worst_index: int | None
    worst_labels: list | None
    worst_region: Region | None
    certified_s: str
    min_certificate_fraction: Fraction | None
    certificate_gaps: int
    seed: int | None = None
    extra: dict = field(default_factory=dict)
    batches: list = field(default_factory=list)
    wall_time: float = 0.0

    def _bitmaps(self):
        if self.worst_labels is None:
            return None, None
        spec = GridSpec(self.d, self.L)
        p = CellSet.from_cells(spec, [i for i, x in enumerate(self.worst_labels) if x == 1])
        m = CellSet.from_cells(spec, [i for i, x in enumerate(self.worst_labels) if x == 2])
        return p.to_hex(), m.to_hex()

    def as_dict(self) -> dict:
        """Deterministic report body (wall time is kept out)."""
        p, m = self._bitmaps()
        return {
            "tau": self.tau,
            "d": self.d,
            "L": self.L,
            "refine": self.refine,
            "kind": self.kind,
            "strategy": self.strategy,
            "nonstrict": self.nonstrict,
            "seed": self.seed,
            "examined": self.examined,
            "feasible": self.feasible,
            "s_hat": str(self.s_hat),
            "s_hat_float": float(self.s_hat),
            "vacuous": self.vacuous,
            "worst_index": self.worst_index,
            "worst_labels": self.worst_labels,
            "worst_plus_hex": p,
            "worst_minus_hex": m,
            "worst_region": _region_json(self.worst_region),
            "certified_s": self.certified_s,
            "min_certificate_fraction": None
            if self.min_certificate_fraction is None
            else str(self.min_certificate_fraction),
            "certificate_gaps": self.certificate_gaps,
            "extra": self.extra,
        }


# ---------------------------------------------------------------- exhaustive shards


def _shard_job(args):
    d, L, kind, refine, tau_a, tau_b, nonstrict, lo, hi = args
    spec = GridSpec(d, L)
    kind = CollectionKind.parse(kind)
    tau = Surd(Fraction(tau_a), Fraction(tau_b))
    rule = DecompositionSpec.for_kind(kind)
    table = region_table(kind, spec, refine)
    n = spec.cell_count
    W = table.weights
    best, best_idx, cert_min, gaps, feasible = None, None, None, 0, 0
    for idx in range(lo, hi):
        labels = decode_config(idx, n)
        np_, nm = labels.count(1), labels.count(2)
        if not _feasible(np_, nm, n - np_ - nm, tau, nonstrict):
            continue
        feasible += 1
        lab = np.asarray(labels, dtype=np.int64)
        _, v = _pick_best(table, W @ (lab == 1).astype(np.int64), W @ (lab == 2).astype(np.int64))
        if best is None or v < best:
            best, best_idx = v, idx
        if not nonstrict or np_ and nm:
            try:
                cert = chain_descent(TriPartition.from_labels(spec, labels), rule, tau)
            except PreconditionError:
                cert = None
            if cert is not None:
                cf = cert.min_fraction
                if cert_min is None or cf < cert_min:
                    cert_min = cf
                if cf > v:
                    gaps += 1
    return {
        "lo": lo,
        "hi": hi,
        "feasible": feasible,
        "best": None if best is None else str(best),
        "best_idx": best_idx,
        "cert_min": None if cert_min is None else str(cert_min),
        "gaps": gaps,
    }


def _merge(shards: list[dict]):
    feasible, best, best_idx, cert_min, gaps = 0, None, None, None, 0
    for sh in sorted(shards, key=lambda s: s["lo"]):
        feasible += sh["feasible"]
        gaps += sh["gaps"]
        if sh["best"] is not None:
            v = Fraction(sh["best"])
            if best is None or v < best or (v == best and sh["best_idx"] < best_idx):
                best, best_idx = v, sh["best_idx"]
        if sh["cert_min"] is not None:
            c = Fraction(sh["cert_min"])
            cert_min = c if cert_min is None else min(cert_min, c)
    return feasible, best, best_idx, cert_min, gaps


def _config_key(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _load_checkpoint(path: Path | None, key: str) -> dict:
    if path is None or not path.exists():
        return {}
    data = json.loads(path.read_text())
    if data.get("key") != key:
        raise PreconditionError("checkpoint belongs to a different search configuration")
    return {int(k): v for k, v in data["shards"].items()}


def _save_checkpoint(path: Path | None, key: str, done: dict):
    if path is None:
        return
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps({"key": key, "shards": {str(k): v for k, v in sorted(done.items())}}, sort_keys=True))
    os.replace(tmp, path)


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("BMOLAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, requested or 1)


def _exhaustive(spec, kind, refine, tau, nonstrict, budget, workers, checkpoint, shard_size, max_shards):
    n = spec.cell_count
    total = 3 ** n
    if total > budget:
        raise BudgetExceeded(f"3^{n} = {total} configurations exceed the budget {budget}")
    cfg = {
        "d": spec.dim,
        "L": spec.level,
        "kind": kind.value,
        "refine": refine,
        "tau": [str(tau.a), str(tau.b)],
        "nonstrict": nonstrict,
        "shard": shard_size,
    }
    key = _config_key(cfg)
    done = _load_checkpoint(checkpoint, key)
    jobs = []
    for sid, lo in enumerate(range(0, total, shard_size)):
        if sid not in done:
            jobs.append((sid, (spec.dim, spec.level, kind.value, refine, str(tau.a), str(tau.b), nonstrict, lo, min(lo + shard_size, total))))
    if max_shards is not None:
        jobs = jobs[:max_shards]
    if workers <= 1:
        for sid, args in jobs:
            done[sid] = _shard_job(args)
            _save_checkpoint(checkpoint, key, done)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (sid, _), res in zip(jobs, pool.map(_shard_job, [a for _, a in jobs])):
                done[sid] = res
                _save_checkpoint(checkpoint, key, done)
    complete = len(done) == -(-total // shard_size)
    examined = sum(sh["hi"] - sh["lo"] for sh in done.values())
    batches = [done[k] for k in sorted(done)]
    return examined, complete, batches, _merge(batches)


# ---------------------------------------------------------------- annealing


def _anneal_chain(args):
    d, L, kind, refine, tau_a, tau_b, nonstrict, steps, seed, t0, t1 = args
    spec = GridSpec(d, L)
    kind = CollectionKind.parse(kind)
    tau = Surd(Fraction(tau_a), Fraction(tau_b))
    n = spec.cell_count
    rng = random.Random(seed)
    labels = [1 if i < n // 2 else 2 for i in range(n)]
    rng.shuffle(labels)
    _, cur = config_score(labels, spec, kind, refine)
    best, best_labels = cur, list(labels)
    evaluated = 1
    for step in range(steps):
        temp = t0 * (t1 / t0) ** (step / max(1, steps - 1))
        i = rng.randrange(n)
        new = rng.choice([x for x in (0, 1, 2) if x != labels[i]])
        old = labels[i]
        labels[i] = new
        np_, nm = labels.count(1), labels.count(2)
        if not _feasible(np_, nm, n - np_ - nm, tau, nonstrict):
            labels[i] = old
            continue
        _, v = config_score(labels, spec, kind, refine)
        evaluated += 1
        delta = float(v - cur)
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            cur = v
            if v < best or (v == best and encode_config(labels) < encode_config(best_labels)):
                best, best_labels = v, list(labels)
        else:
            labels[i] = old
    return {"seed": seed, "best": str(best), "labels": best_labels, "evaluated": evaluated}


def _anneal(spec, kind, refine, tau, nonstrict, budget, workers, seed, chains, t0, t1):
    if seed is None:
        raise PreconditionError("annealing needs a seed")
    steps = max(1, budget // chains)
    jobs = [
        (spec.dim, spec.level, kind.value, refine, str(tau.a), str(tau.b), nonstrict, steps, seed * 1000 + c, t0, t1)
        for c in range(chains)
    ]
    if workers <= 1:
        results = [_anneal_chain(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_anneal_chain, jobs))
    return results


# ---------------------------------------------------------------- frontier search


def frontier_search(
    tau,
    d: int,
    L: int,
    kind="cubes",
    strategy: str = "exhaustive",
    refine: int = 0,
    budget: int = 10**5,
    *,
    seed: int | None = None,
    workers: int | None = None,
    checkpoint: str | Path | None = None,
    nonstrict: bool = False,
    shard_size: int = DEFAULT_SHARD,
    max_shards: int | None = None,
    chains: int = 4,
    t0: float = 0.05,
    t1: float = 0.001,
) -> SearchReport:
    """Smallest best-balancing score over feasible three-set labelings of the grid."""
    tau = Surd.coerce(tau)
    if not 0 < tau < Fraction(1, 2):
        raise PreconditionError("tau must lie in (0, 1/2)")
    kind = CollectionKind.parse(kind)
    spec = GridSpec(d, L)
    workers = worker_count(workers)
    rule = DecompositionSpec.for_kind(kind)
    try:
        cert_s = str(float(certified_pair(d, kind)[1]))
    except PreconditionError:
        cert_s = "n/a"
    start = time.perf_counter()
    extra: dict = {}
    if strategy == "exhaustive":
        ck = Path(checkpoint) if checkpoint is not None else None
        examined, complete, batches, (feasible, best, best_idx, cert_min, gaps) = _exhaustive(
            spec, kind, refine, tau, nonstrict, budget, workers, ck, shard_size, max_shards
        )
        extra["complete"] = complete
        extra["shard_size"] = shard_size
        labels = decode_config(best_idx, spec.cell_count) if best_idx is not None else None
    elif strategy == "anneal":
        results = _anneal(spec, kind, refine, tau, nonstrict, budget, workers, seed, chains, t0, t1)
        best, labels, best_idx = None, None, None
        for r in results:
            v = Fraction(r["best"])
            if best is None or v < best:
                best, labels = v, r["labels"]
        best_idx = encode_config(labels)
        examined = sum(r["evaluated"] for r in results)
        feasible = examined
        cert = chain_descent(TriPartition.from_labels(spec, labels), rule, tau)
        cert_min, gaps = cert.min_fraction, int(cert.min_fraction > best)
        batches = [{"seed": r["seed"], "best": r["best"], "evaluated": r["evaluated"]} for r in results]
        extra["upper_bound"] = True
    else:
        raise PreconditionError(f"unknown strategy {strategy!r}")
    vacuous = best is None
    region = None
    if not vacuous:
        region, _ = config_score(labels, spec, kind, refine)
    rep = SearchReport(
        tau=str(tau),
        d=d,
        L=L,
        refine=refine,
        kind=kind.value,
        strategy=strategy,
        nonstrict=nonstrict,
        examined=examined,
        feasible=feasible,
        s_hat=Fraction(1, 2) if vacuous else best,
        vacuous=vacuous,
        worst_index=best_idx,
        worst_labels=labels,
        worst_region=region,
        certified_s=cert_s,
        min_certificate_fraction=cert_min,
        certificate_gaps=gaps,
        seed=seed,
        extra=extra,
        batches=batches,
    )
    rep.wall_time = time.perf_counter() - start
    return rep


# ---------------------------------------------------------------- minimality


def implied_s(tau_prime) -> Fraction:
    """``1 / (2 + 1/tau')``: the balance a minimal cube with equal parts would give."""
    t = Fraction(tau_prime)
    return 1 / (2 + 1 / t)


@dataclass
class MinimalityReport:
    cube: AxisCube
    tau_prime: Fraction
    plus: Fraction
    minus: Fraction
    rest_term: Fraction
    good: bool
    exceptional: bool
    minimal: bool
    defect: Fraction
    fap_gap: Fraction
    fap_tolerance: Fraction
    witness: AxisCube | None = None
    witness_kind: str | None = None
    balancing: AxisCube | None = None
    balancing_fractions: tuple | None = None
    balancing_tolerance: Fraction | None = None

    @property
    def fap_holds(self) -> bool:
        return not self.minimal or 0 <= self.fap_gap <= self.fap_tolerance

    def as_dict(self) -> dict:
        return {
            "cube": _region_json(self.cube),
            "tau_prime": str(self.tau_prime),
            "plus": str(self.plus),
            "minus": str(self.minus),
            "tau_prime_rest": str(self.rest_term),
            "good": self.good,
            "exceptional": self.exceptional,
            "minimal": self.minimal,
            "defect": str(self.defect),
            "fap_gap": str(self.fap_gap),
            "fap_tolerance": str(self.fap_tolerance),
            "fap_holds": self.fap_holds,
            "witness": _region_json(self.witness),
            "witness_kind": self.witness_kind,
            "balancing": _region_json(self.balancing),
            "balancing_fractions": None
            if self.balancing_fractions is None
            else [str(x) for x in self.balancing_fractions],
        }


def _classify(p, m, g, tau_prime):
    exceptional = p > 0 and m > 0 and g == 0
    good = p > 0 and m > 0 and tau_prime * g > 0 and min(p, m) >= tau_prime * g
    return good, exceptional


def _layer(V: AxisCube) -> Fraction:
    n = V.side
    return V.measure * (1 - Fraction(n - 1, n) ** V.dim)


def minimality_scan(
    F_plus: CellSet, F_minus: CellSet, tau_prime, refine: int = 0, V: AxisCube | None = None
) -> MinimalityReport:
    """Classify ``V`` (default: the unit cube) and look for smaller good or exceptional cubes.

    The witness is the smallest good-or-exceptional strict subcube (good
    preferred on equal measure, then enumeration order), so a good witness
    is itself minimal at this grid scale.
    """
    if not F_plus.is_disjoint(F_minus):
        raise PreconditionError("F+ and F- must be disjoint")
    tp = Fraction(tau_prime)
    if not 0 < tp < Fraction(1, 2):
        raise PreconditionError("tau' must lie in (0, 1/2)")
    spec = F_plus.spec
    V = V or unit_cube(spec.dim)
    level = max(V.level, spec.level + refine)
    corner, sides = rescale(V, level)
    V = AxisCube(level, corner, sides[0])
    rest = (F_plus | F_minus).complement()
    p, m, g = F_plus.measure_in(V), F_minus.measure_in(V), rest.measure_in(V)
    good, exc = _classify(p, m, g, tp)

    table = region_table(CollectionKind.CUBES, spec, level - spec.level)
    vc, vs = np.array(corner), np.array(sides)
    inside = np.all(table.corners >= vc, axis=1) & np.all(table.corners + table.sides <= vc + vs, axis=1)
    inside &= table.sides[:, 0] < V.side
    ip, im, ig = _indicator(F_plus), _indicator(F_minus), _indicator(rest)
    A, B, C = table.weights @ ip, table.weights @ im, table.weights @ ig
    both = (A > 0) & (B > 0)
    exc_rows = both & (C == 0)
    good_rows = both & (C > 0) & (np.minimum(A, B) * tp.denominator >= C * tp.numerator)
    witness, wkind = None, None
    cand = np.nonzero(inside & (exc_rows | good_rows))[0]
    if cand.size:
        size = table.totals[cand].min()
        smallest = cand[table.totals[cand] == size]
        goods = smallest[good_rows[smallest]]
        row = int(goods[0]) if goods.size else int(smallest[0])
        witness, wkind = table.regions[row], "good" if good_rows[row] else "exceptional"
    rep = MinimalityReport(
        cube=V,
        tau_prime=tp,
        plus=p,
        minus=m,
        rest_term=tp * g,
        good=good,
        exceptional=exc,
        minimal=good and witness is None,
        defect=abs(p - m),
        fap_gap=min(p, m) - tp * g,
        fap_tolerance=_layer(V),
        witness=witness,
        witness_kind=wkind,
    )
    target = V if exc else (witness if wkind == "exceptional" else None)
    if target is not None:
        bal = bidensity_continuous(F_plus, target, Fraction(1, 2), refine=max(0, level - max(target.level, spec.level)))
        rep.balancing = bal
        rep.balancing_fractions = (fraction_in(F_plus, bal), fraction_in(F_minus, bal))
        rep.balancing_tolerance = continuous_tolerance(bal.side, spec.dim)
    return rep


def _random_boxes(rng: random.Random, spec: GridSpec, count: int) -> CellSet:
    n = spec.side_cells
    out = CellSet.empty(spec)
    for _ in range(count):
        lo = [rng.randrange(n) for _ in range(spec.dim)]
        hi = [rng.randrange(l, min(n, l + max(1, n // 2))) + 1 for l in lo]
        shape = [h - l for l, h in zip(lo, hi)]
        cells = [spec.index([l + x for l, x in zip(lo, off)]) for off in np.ndindex(*shape)]
        out = out | CellSet.from_cells(spec, cells)
    return out


def question_b_experiment(
    d: int, L: int, tau_prime, trials: int, seed: int, refine: int = 0, boxes: int = 2, max_attempts: int = 200
) -> dict:
    """Random box-union pairs; descend to a grid-minimal cube and record ``|F+ - F-|`` there."""
    if d not in (1, 2):
        raise PreconditionError("the experiment supports d in {1, 2}")
    spec = GridSpec(d, L)
    tp = Fraction(tau_prime)
    rng = random.Random(seed)
    rows = []
    for t in range(trials):
        for _ in range(max_attempts):
            Fp = _random_boxes(rng, spec, rng.randint(1, boxes))
            Fm = _random_boxes(rng, spec, rng.randint(1, boxes)) - Fp
            npl, nmi = Fp.bits.bit_count(), Fm.bits.bit_count()
            rest = spec.cell_count - npl - nmi
            if not _classify(npl, nmi, rest, tp)[0]:
                continue
            top = minimality_scan(Fp, Fm, tp, refine)
            break
        else:
            rows.append({"trial": t, "outcome": "no-good-start"})
            continue
        if top.minimal:
            rep = top
        elif top.witness_kind == "good":
            rep = minimality_scan(Fp, Fm, tp, refine, V=top.witness)
        else:
            rows.append({"trial": t, "outcome": "exceptional", "plus_hex": Fp.to_hex(), "minus_hex": Fm.to_hex(),
                         "balancing_fractions": [str(x) for x in top.balancing_fractions]})
            continue
        rows.append({
            "trial": t,
            "outcome": "minimal" if rep.minimal else "not-minimal",
            "plus_hex": Fp.to_hex(),
            "minus_hex": Fm.to_hex(),
            "cube": _region_json(rep.cube),
            "defect": str(rep.defect),
            "defect_float": float(rep.defect),
            "fap_gap": str(rep.fap_gap),
            "fap_holds": rep.fap_holds,
        })
    defects = [Fraction(r["defect"]) for r in rows if r["outcome"] == "minimal"]
    cell = Fraction(1, spec.cell_count if d == 1 else (1 << L))
    out = {
        "d": d,
        "L": L,
        "refine": refine,
        "tau_prime": str(tp),
        "trials": trials,
        "seed": seed,
        "implied_s": str(implied_s(tp)),
        "minimal_count": len(defects),
        "exceptional_count": sum(r["outcome"] == "exceptional" for r in rows),
        "max_defect": str(max(defects)) if defects else None,
        "rows": rows,
    }
    if d == 1:
        out["one_cell"] = str(cell)
        out["defect_within_one_cell"] = all(x <= cell for x in defects)
    return out


def discretize_intervals(intervals, L: int) -> CellSet:
    """Cells of the level-``L`` grid on [0, 1] whose centre lies in one of the closed intervals."""
    spec = GridSpec(1, L)
    n = spec.side_cells
    cells = []
    for i in range(n):
        c = Fraction(2 * i + 1, 2 * n)
        if any(Fraction(a) <= c <= Fraction(b) for a, b in intervals):
            cells.append(i)
    return CellSet.from_cells(spec, cells)


def defect_by_level(plus_intervals, minus_intervals, tau_prime, levels, refine: int = 0) -> list[dict]:
    """Equality defect at the grid-minimal interval reached from [0, 1] for each level."""
    out = []
    for L in levels:
        Fp = discretize_intervals(plus_intervals, L)
        Fm = discretize_intervals(minus_intervals, L) - Fp
        top = minimality_scan(Fp, Fm, tau_prime, refine)
        rep = top
        if not top.good:
            out.append({"L": L, "outcome": "not-good"})
            continue
        if not top.minimal:
            if top.witness_kind != "good":
                out.append({"L": L, "outcome": "exceptional"})
                continue
            rep = minimality_scan(Fp, Fm, tau_prime, refine, V=top.witness)
        out.append({"L": L, "outcome": "minimal", "defect": rep.defect, "cube": _region_json(rep.cube)})
    return out
