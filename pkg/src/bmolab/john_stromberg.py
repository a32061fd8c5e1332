"""The John-Stromberg functional and bounds for monotone functions.

``J(f, E, s)`` is the least half-width ``alpha`` of a closed value window
``[c - alpha, c + alpha]`` that holds strictly more than ``(1 - s)`` of the
measure of ``E``.  Two independent routes are provided:

* :func:`j_functional_def` sweeps windows over the sorted weighted values;
* :func:`j_functional_rearr` takes half the smallest drop of the
  non-increasing rearrangement across a gap of length ``(1 - s) * |E|``.

The parameter ``s`` may be a Fraction or a :class:`~bmolab.surd.Surd`.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import GridIncompatible, NegativeValues, PreconditionError
from .grid_core import (
    AxisCube,
    CollectionKind,
    Domain,
    GridFunction,
    GridSpec,
    Region,
    WeightedSample,
    as_fraction,
    sample,
)
from .lipschitz import PiecewiseLinear
from .oscillation_median import SeminormResult, bmo_seminorm, seminorm_over
from .rearrangement import StepFunction, rearrange_sample
from .reports import BoundCheck, MarginReport, MarginRow
from .surd import Surd

__all__ = [
    "JsParams",
    "coerce_s",
    "j_of_sample",
    "j_functional_def",
    "j_functional_rearr",
    "j_seminorm",
    "j_seminorm_detail",
    "interval_j",
    "interval_j_seminorm",
    "interval_j_grid",
    "chebyshev_bound_check",
    "lipschitz_j_check",
    "affine_covariance_check",
    "AffineCheck",
    "monotone_difference_bound",
    "monotone_tail_bound",
    "difference_tail_bound",
    "staircase",
]


def coerce_s(s):
    """Fraction for rational input, Surd for the irrational constants."""
    if isinstance(s, Surd):
        return s.a if s.is_rational else s
    if isinstance(s, str):
        x = Surd.coerce(s)
        return x.a if x.is_rational else x
    return as_fraction(s)


@dataclass(frozen=True)
class JsParams:
    s: object

    def __post_init__(self):
        s = coerce_s(self.s)
        object.__setattr__(self, "s", s)
        if not 0 < s < 1:
            raise PreconditionError(f"s must lie in (0, 1), got {s}")

    @property
    def rho(self):
        return self.s / (1 - self.s)

    def require_half(self):
        if self.s > Fraction(1, 2):
            raise PreconditionError(f"this bound needs s <= 1/2, got {self.s}")
        return self


def _sample_of(f, where) -> WeightedSample:
    if isinstance(f, WeightedSample):
        return f
    if isinstance(f, StepFunction):
        return f.as_sample()
    return sample(f, where)


def j_of_sample(ws: WeightedSample, s) -> Fraction:
    s = JsParams(s).s
    # integer weights: "acc > (1 - s) total" is "acc >= need"
    need = math.floor((1 - s) * ws.total) + 1
    vals, wts, n = ws.values, ws.weights, len(ws.values)
    best = None
    j, acc = 0, 0
    for i in range(n):
        while j < n and acc < need:
            acc += wts[j]
            j += 1
        if acc < need:
            break
        width = (vals[j - 1] - vals[i]) / 2
        if best is None or width < best:
            best = width
        acc -= wts[i]
    return best


def j_functional_def(f, where: Domain = None, s=Fraction(1, 2)) -> Fraction:
    """J by the window definition; works for signed functions."""
    return j_of_sample(_sample_of(f, where), s)


def _at(h: StepFunction, x):
    return h.values[bisect_right(h.breaks, x) - 1]


def interval_j(h: StepFunction, a, ell, s):
    """J of a monotone step function on the sub-interval ``(a, a + ell)``."""
    w, top = (1 - s) * ell, s * ell
    cands = [0]
    for t in h.breaks:
        for u in (t - a, t - a - w):
            if 0 < u < top:
                cands.append(u)
    return min(_at(h, a + u) - _at(h, a + u + w) for u in cands) / 2


def j_functional_rearr(f, where: Domain = None, s=Fraction(1, 2)) -> Fraction:
    """J from the rearrangement; ``f`` must be non-negative on the set."""
    s = JsParams(s).s
    ws = _sample_of(f, where)
    if ws.values[0] < 0:
        raise NegativeValues("the rearrangement route needs a non-negative function")
    h = rearrange_sample(ws)
    return interval_j(h, 0, h.length, s)


def j_seminorm_detail(
    f: GridFunction, kind="cubes", s=Fraction(1, 2), refine: int = 0, within: Region | None = None
) -> SeminormResult:
    s = JsParams(s).s
    kind = CollectionKind.parse(kind)
    vals = f.values
    cap = (max(vals) - min(vals)) / 2
    return seminorm_over(f, kind, lambda ws: j_of_sample(ws, s), refine, within, stop_at=cap)


def j_seminorm(f: GridFunction, kind="cubes", s=Fraction(1, 2), refine: int = 0) -> Fraction:
    """Sup of ``J(f, W, s)`` over the region collection."""
    return j_seminorm_detail(f, kind, s, refine).value


def _solve(l1, l2):
    (p1, q1, c1), (p2, q2, c2) = l1, l2
    det = p1 * q2 - p2 * q1
    if det == 0:
        return None
    return (c1 * q2 - c2 * q1) / det, (p1 * c2 - p2 * c1) / det


def interval_j_seminorm(h: StepFunction, s):
    """Exact sup of J over all open sub-intervals of ``(0, h.length)``.

    For fixed ``s`` the super-level sets of ``(a, ell) -> J(h, (a, a+ell), s)``
    are closed unions of faces of a finite line arrangement, so the sup is
    attained at one of its vertices.  Returns ``(value, (a, ell))``.
    """
    s = JsParams(s).s
    m = h.length
    cap = (h.values[0] - h.values[-1]) / 2
    if cap == 0:
        return Fraction(0), (Fraction(0), m)
    T = h.breaks
    lines = []
    for kappa in (0, s, 1 - s, 1):
        lines.extend((1, kappa, t) for t in T)
    lines.extend((0, 1, (t2 - t1) / (1 - s)) for t1, t2 in combinations(T, 2))
    best, arg = Fraction(0), (Fraction(0), m)
    seen = set()
    for l1, l2 in combinations(lines, 2):
        pt = _solve(l1, l2)
        if pt is None or pt in seen:
            continue
        seen.add(pt)
        a, ell = pt
        if not (ell > 0 and a >= 0 and a + ell <= m):
            continue
        v = interval_j(h, a, ell, s)
        if v > best:
            best, arg = v, (a, ell)
            if best >= cap:
                break
    return best, arg


def interval_j_grid(h: StepFunction, s, level: int):
    """Lower bound on :func:`interval_j_seminorm` from intervals with dyadic endpoints."""
    s = JsParams(s).s
    n = 1 << level
    pts = [h.length * Fraction(i, n) for i in range(n + 1)]
    best = Fraction(0)
    for i in range(n):
        for j in range(i + 1, n + 1):
            v = interval_j(h, pts[i], pts[j] - pts[i], s)
            if v > best:
                best = v
    return best


def chebyshev_bound_check(f: GridFunction, kind="cubes", s=Fraction(1, 4), refine: int = 0) -> BoundCheck:
    """``J-seminorm <= O-seminorm / s`` for ``s <= 1/2``."""
    s = JsParams(s).require_half().s
    j = j_seminorm(f, kind, s, refine)
    o = bmo_seminorm(f, kind, "O", refine)
    return BoundCheck(j, o / s)


def lipschitz_j_check(f: GridFunction, phi: PiecewiseLinear, where: Domain = None, s=Fraction(1, 2)) -> BoundCheck:
    """``J(phi o f, E, s) <= J(f, E, s)`` for a 1-Lipschitz ``phi``."""
    if not isinstance(phi, PiecewiseLinear):
        phi = PiecewiseLinear(*phi)
    g = f.map(phi)
    return BoundCheck(j_functional_def(g, where, s), j_functional_def(f, where, s))


@dataclass(frozen=True)
class AffineCheck:
    j_pulled_back: Fraction
    j_on_image: Fraction
    image: AxisCube
    grid_level: int

    @property
    def passed(self) -> bool:
        return self.j_pulled_back == self.j_on_image


def _dyadic_level(xs) -> int | None:
    lvl = 0
    for x in xs:
        d = x.denominator
        if d & (d - 1):
            return None
        lvl = max(lvl, d.bit_length() - 1)
    return lvl


_MAX_PULLBACK_CELLS = 1 << 16


def affine_covariance_check(f: GridFunction, r, x0, E: AxisCube, s=Fraction(1, 2)) -> AffineCheck:
    """Compare ``J(g, E, s)`` with ``J(f, rE + x0, s)`` for ``g(x) = f(r x + x0)``.

    ``g`` is materialised on a grid fine enough that every cell maps into a
    single cell of ``f``; ``GridIncompatible`` is raised when no such grid exists.
    """
    d, Lf = f.spec.dim, f.spec.level
    r = as_fraction(r)
    if r == 0:
        raise PreconditionError("r must be non-zero")
    x0 = tuple(as_fraction(x) for x in (x0 if isinstance(x0, (tuple, list)) else (x0,) * d))
    if len(x0) != d or E.dim != d:
        raise PreconditionError("translation and region must match the grid dimension")
    unit = Fraction(1, 1 << E.level)
    lo = [c * unit for c in E.corner]
    hi = [(c + E.side) * unit for c in E.corner]
    img_lo, img_hi = [], []
    for i in range(d):
        y1, y2 = r * lo[i] + x0[i], r * hi[i] + x0[i]
        img_lo.append(min(y1, y2))
        img_hi.append(max(y1, y2))
    if any(v < 0 for v in img_lo) or any(v > 1 for v in img_hi):
        raise PreconditionError("the image region leaves the unit cube")
    img_level = _dyadic_level(img_lo + img_hi)
    if img_level is None:
        raise GridIncompatible("image corners are not dyadic")
    n_img = 1 << img_level
    image = AxisCube(
        img_level,
        tuple(int(v * n_img) for v in img_lo),
        int((img_hi[0] - img_lo[0]) * n_img),
    )
    # pull-back grid: f-grid points must map back onto it
    need = [x / r for x in x0] + [Fraction(1, 1 << Lf) / r] + lo + hi
    Lg = _dyadic_level(need)
    if Lg is None:
        raise GridIncompatible("f's cells do not pull back to dyadic cells")
    Lg = max(Lg, E.level)
    if (1 << (d * Lg)) > _MAX_PULLBACK_CELLS:
        raise GridIncompatible(f"pull-back grid at level {Lg} is too large")
    gspec = GridSpec(d, Lg)
    ng, nf = 1 << Lg, 1 << Lf

    def value(coords):
        idx = []
        for i, c in enumerate(coords):
            y = r * Fraction(2 * c + 1, 2 * ng) + x0[i]
            if not 0 <= y < 1:
                return Fraction(0)
            idx.append(math.floor(y * nf))
        return f.values[f.spec.index(idx)]

    g = GridFunction.from_callable(gspec, value)
    return AffineCheck(
        j_functional_def(g, E, s),
        j_functional_def(f, image, s),
        image,
        Lg,
    )


def _difference_sup(h: StepFunction, rho):
    half = h.length / 2
    cands = {Fraction(0)}
    for t in h.breaks:
        for u in (t, t / rho):
            if 0 < u <= half:
                cands.add(u)
    best = Fraction(0)
    for t in cands:
        v = _at(h, rho * t) - _at(h, t)
        if v > best:
            best = v
    return best


def monotone_difference_bound(h: StepFunction, s):
    """``(sup_{0<t<=m/2} h(rho t) - h(t), 2 * J-seminorm over sub-intervals)``."""
    p = JsParams(s)
    if not p.s < Fraction(1, 2):
        raise PreconditionError("needs s < 1/2")
    return _difference_sup(h, p.rho), 2 * interval_j_seminorm(h, p.s)[0]


def _tail_alphas(h: StepFunction, centre):
    """Positive level-set breakpoints above ``h(centre)``, their midpoints and one point beyond.

    ``alpha = 0`` is left out: ``{h >= h(m/2)}`` may be longer than ``m/2``,
    which the prefactor does not cover once ``s > 1/3``.
    """
    base = _at(h, centre)
    ups = sorted({v - base for v in h.values if v >= base} | {Fraction(0)})
    pts = set(ups)
    for x, y in zip(ups, ups[1:]):
        pts.add((x + y) / 2)
    pts.add(ups[-1] + 1)
    pts.discard(Fraction(0))
    return sorted(pts)


def _exp_bound(prefactor: float, alpha, rate: float, scale) -> float:
    """``prefactor * exp(-alpha * rate / scale)`` with 0/0 and x/0 conventions."""
    if alpha == 0:
        return prefactor
    if scale == 0:
        return 0.0 if rate > 0 else prefactor
    return prefactor * math.exp(-float(alpha) * rate / float(scale))


def monotone_tail_bound(h: StepFunction, s, alphas=None) -> MarginReport:
    """Exponential bound on ``|{t : h(t) - h(m/2) >= alpha}|`` through the J-seminorm."""
    p = JsParams(s).require_half()
    m = h.length
    centre = m / 2
    jn, _ = interval_j_seminorm(h, p.s)
    sf = float(p.s)
    pref = (1 - sf) / (2 * sf) * float(m)
    rate = math.log(1 / sf - 1)
    base = _at(h, centre)
    rep = MarginReport("monotone_tail", params={"s": str(p.s), "j_seminorm": str(jn), "length": str(m)})
    for a in alphas if alphas is not None else _tail_alphas(h, centre):
        a = as_fraction(a)
        lhs = h.measure_where(lambda v: v - base >= a)
        rep.rows.append(MarginRow(a, lhs, _exp_bound(pref, a, rate, 2 * jn)))
    return rep


def difference_tail_bound(h: StepFunction, s, alphas=None) -> MarginReport:
    """Same tail through ``c = sup h(rho t) - h(t)``: ``(m / 2rho) exp(-alpha log(1/rho) / c)``."""
    p = JsParams(s)
    m = h.length
    centre = m / 2
    c = _difference_sup(h, p.rho)
    rho = float(p.rho)
    base = _at(h, centre)
    rep = MarginReport("difference_tail", params={"s": str(p.s), "c": str(c), "length": str(m)})
    for a in alphas if alphas is not None else _tail_alphas(h, centre):
        a = as_fraction(a)
        lhs = h.measure_where(lambda v: v - base >= a)
        rep.rows.append(MarginRow(a, lhs, _exp_bound(float(m) / (2 * rho), a, math.log(1 / rho), c)))
    return rep


def staircase(a) -> StepFunction:
    """``N - k`` on ``[k a, (k+1) a)``, truncated to (0, 1), with ``N`` minimal for ``N a >= 1``."""
    a = as_fraction(a)
    if not 0 < a < 1:
        raise PreconditionError("a must lie in (0, 1)")
    N = math.ceil(1 / a)
    pieces = []
    for k in range(N):
        lo, hi = k * a, min((k + 1) * a, Fraction(1))
        pieces.append((hi - lo, N - k))
    return StepFunction.from_pieces(pieces)
