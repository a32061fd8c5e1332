"""Checks of the exponential-decay inequalities and of the constant calculus.

Left-hand sides (measures of level sets) are exact.  Right-hand sides go
through ``math.exp``/``math.log`` and are compared with ``RHS_SLACK``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .decomposition_geometry import (
    DecompositionSpec,
    TriPartition,
    bidensity_constant,
    certified_pair,
    certified_s,
    fraction_in,
)
from .errors import (
    HypothesisViolated,
    InvalidConstants,
    NegativeValues,
    PairUnsupported,
    PreconditionError,
)
from .grid_core import (
    CollectionKind,
    GridFunction,
    Region,
    as_fraction,
    enumerate_regions,
    sample,
)
from .john_stromberg import JsParams, _exp_bound, interval_j_seminorm, j_of_sample
from .oscillation_median import deviation_integral, median_of_sample, seminorm_over
from .rearrangement import StepFunction, rearrange
from .reports import MarginReport, MarginRow
from .surd import SQRT2_MINUS_1, Surd, smin

__all__ = [
    "JnConstants",
    "DecayProfile",
    "PipelineReport",
    "TransferCheck",
    "NinverseReport",
    "phi",
    "phi_properties",
    "mainjs_prefactor",
    "supported_s",
    "require_supported_pair",
    "deviation_alphas",
    "mainjs_seminorms",
    "verify_mainjs",
    "reduction_pipeline_check",
    "rearrangement_transfer_check",
    "ninverse_probe",
    "convert_constants",
    "chain_conversions",
    "wik_constants",
    "wik_comparison",
    "transfer_sigma_floor",
]


# ---------------------------------------------------------------- pairs


def _rule_for(kind: CollectionKind) -> DecompositionSpec:
    return DecompositionSpec.for_kind(kind)


def supported_s(tau, d: int, kind="cubes"):
    """Largest ``s`` the certified construction gives for this ``tau``."""
    kind = CollectionKind.parse(kind)
    if kind is CollectionKind.INTERVALS:
        d, kind = 1, CollectionKind.CUBES
    certified_pair(d, kind)  # rejects unsupported families
    rule = _rule_for(kind)
    tau = Surd.coerce(tau)
    t = smin(tau, SQRT2_MINUS_1)
    return certified_s(t, rule.multiplicity(d), bidensity_constant(rule, d))


def require_supported_pair(tau, s, d: int, kind="cubes", trusted: bool = False):
    """``(tau, s)`` as Surds; ``PairUnsupported`` unless certified or explicitly trusted."""
    tau, s = Surd.coerce(tau), Surd.coerce(s)
    if not (0 < tau < Fraction(1, 2) and 0 < s <= Fraction(1, 2)):
        raise PairUnsupported(f"({tau}, {s}) is outside (0, 1/2) x (0, 1/2]")
    if not trusted and s > Surd.coerce(supported_s(tau, d, kind)):
        raise PairUnsupported(f"s = {float(s):.6g} exceeds the certified value for tau = {float(tau):.6g}")
    return tau, s


# ---------------------------------------------------------------- main inequality


def mainjs_prefactor(r) -> float:
    r = float(r)
    return max(r, 2 * math.sqrt(r))


def _region_sample(f: GridFunction, Q: Region | None):
    return sample(f, Q)


def deviation_alphas(values, centre) -> list[Fraction]:
    """``{0}``, every value of ``|f - centre|`` and the midpoints between consecutive ones.

    The left side is constant on each ``(v_i, v_{i+1}]`` while the right side
    decreases, so checking at the breakpoints covers every ``alpha >= 0``.
    """
    devs = sorted({abs(v - centre) for v in values} | {Fraction(0)})
    pts = set(devs)
    for x, y in zip(devs, devs[1:]):
        pts.add((x + y) / 2)
    pts.add(devs[-1] + 1)
    return sorted(pts)


def mainjs_seminorms(f: GridFunction, Q: Region | None, kind, s, refine: int = 0) -> tuple[Fraction, Fraction]:
    """``(J(s)-seminorm, O-seminorm)`` of ``f`` over the family inside ``Q``."""
    s = Surd.coerce(s)
    s_j = s.a if s.is_rational else s
    jn = on = Fraction(0)
    for region in enumerate_regions(kind, f.spec, refine, Q):
        ws = sample(f, region)
        jn = max(jn, j_of_sample(ws, s_j))
        on = max(on, deviation_integral(ws, median_of_sample(ws).m) / ws.measure)
    return jn, on


def verify_mainjs(
    f: GridFunction,
    Q: Region | None = None,
    kind="cubes",
    tau=None,
    s=None,
    r=None,
    alphas=None,
    refine: int = 0,
    trusted: bool = False,
    seminorms: tuple | None = None,
) -> tuple[MarginReport, MarginReport]:
    """Tail of ``|f - m|`` against the J-seminorm bound and the O-seminorm bound.

    ``seminorms`` may carry precomputed ``(J, O)`` values to reuse across ``r``.
    """
    kind = CollectionKind.parse(kind)
    d = f.spec.dim
    ct, cs = certified_pair(1 if kind is CollectionKind.INTERVALS else d, kind)
    tau, s = require_supported_pair(ct if tau is None else tau, cs if s is None else s, d, kind, trusted)
    r_hi = 1 / (2 * float(tau))
    r = r_hi if r is None else float(Surd.coerce(r))
    if not 1 - 1e-15 <= r <= r_hi + 1e-12:
        raise PreconditionError(f"r must lie in [1, 1/(2 tau)] = [1, {r_hi:.6g}]")
    ws = _region_sample(f, Q)
    m = median_of_sample(ws).m
    if seminorms is None:
        seminorms = mainjs_seminorms(f, Q, kind, s, refine)
    jn, on = seminorms
    vol = float(ws.measure)
    pref = mainjs_prefactor(r) * vol
    rate = math.log(r)
    params = {
        "tau": str(tau),
        "s": str(s),
        "r": repr(r),
        "median": str(m),
        "kind": kind.value,
        "refine": refine,
    }
    rep_j = MarginReport("mainjs_J", params={**params, "seminorm": str(jn)})
    rep_o = MarginReport("mainjs_O", params={**params, "seminorm": str(on)})
    grid = deviation_alphas(ws.values, m) if alphas is None else [as_fraction(a) for a in alphas]
    for a in grid:
        lhs = ws.measure_where(lambda v: abs(v - m) >= a)
        rep_j.rows.append(MarginRow(a, lhs, _exp_bound(pref, a, rate, 8 * jn)))
        rep_o.rows.append(MarginRow(a, lhs, _exp_bound(pref, a, float(s) * rate, 8 * on)))
    return rep_j, rep_o


# ---------------------------------------------------------------- reduction pipeline


def phi(t) -> int:
    """``0`` on ``[0, 1/2]`` and ``n`` on ``(n - 1/2, n + 1/2]``."""
    t = as_fraction(t)
    if t < 0:
        raise NegativeValues("phi is defined on [0, inf)")
    if t <= Fraction(1, 2):
        return 0
    return math.ceil(t - Fraction(1, 2))


def phi_properties(points) -> dict:
    """Check the jump property on ordered pairs within 1/2 and ``phi(t) >= t - 1/2``."""
    pts = sorted({as_fraction(p) for p in points})
    jump_bad, floor_bad = [], []
    for t in pts:
        if phi(t) < t - Fraction(1, 2):
            floor_bad.append(t)
    j = 0
    for i, lo in enumerate(pts):
        while j < len(pts) and pts[j] <= lo + Fraction(1, 2):
            j += 1
        for hi in pts[i:j]:
            if phi(hi) - phi(lo) not in (0, 1):
                jump_bad.append((lo, hi))
    return {"jump": not jump_bad, "floor": not floor_bad, "jump_failures": jump_bad, "floor_failures": floor_bad}


@dataclass
class PipelineReport:
    median: Fraction
    split_ok: dict
    phi_ok: dict
    normalised: dict
    quantised: dict
    passed: bool

    def as_dict(self) -> dict:
        return {
            "median": str(self.median),
            "split_ok": self.split_ok,
            "phi_ok": self.phi_ok,
            "normalised_seminorm": {k: str(v) for k, v in self.normalised.items()},
            "quantised_seminorm": {k: str(v) for k, v in self.quantised.items()},
            "pass": self.passed,
        }


def reduction_pipeline_check(f: GridFunction, Q: Region | None = None, kind="cubes", s=Fraction(1, 4), refine: int = 0) -> PipelineReport:
    """Median split, normalisation to J-seminorm 1/4 and quantisation through ``phi``."""
    s = JsParams(s).s
    kind = CollectionKind.parse(kind)
    ws = _region_sample(f, Q)
    m = median_of_sample(ws).m
    half = ws.measure / 2
    parts = {
        "plus": f.map(lambda v: max(v - m, Fraction(0))),
        "minus": f.map(lambda v: max(m - v, Fraction(0))),
    }
    split_ok, phi_ok, normalised, quantised = {}, {}, {}, {}
    passed = True
    for name, g in parts.items():
        gs = _region_sample(g, Q)
        split_ok[name] = gs.measure_where(lambda v: v > 0) <= half
        norm = seminorm_over(g, kind, lambda w: j_of_sample(w, s), refine, Q).value
        if norm == 0:
            normalised[name] = Fraction(0)
            quantised[name] = Fraction(0)
            phi_ok[name] = True
            passed &= split_ok[name]
            continue
        gt = g.map(lambda v: v / (4 * norm))
        normalised[name] = seminorm_over(gt, kind, lambda w: j_of_sample(w, s), refine, Q).value
        vals = set(gt.values)
        top = math.ceil(max(vals)) + 1
        vals |= {Fraction(k, 2) for k in range(2 * top + 1)}
        props = phi_properties(vals)
        phi_ok[name] = props["jump"] and props["floor"]
        q = gt.map(phi, integer_valued=True)
        quantised[name] = seminorm_over(q, kind, lambda w: j_of_sample(w, s), refine, Q).value
        passed &= (
            split_ok[name]
            and phi_ok[name]
            and normalised[name] == Fraction(1, 4)
            and quantised[name] <= Fraction(1, 2)
            and _region_sample(q, Q).measure_where(lambda v: v > 0) <= half
        )
    return PipelineReport(m, split_ok, phi_ok, normalised, quantised, passed)


# ---------------------------------------------------------------- rearrangement transfer


def transfer_sigma_floor(tau) -> Surd:
    """``2 tau / (1 + 2 tau)``; admissible ``sigma`` lie strictly above it."""
    tau = Surd.coerce(tau)
    return (2 * tau) * (1 + 2 * tau).reciprocal()


@dataclass(frozen=True)
class TransferCheck:
    lhs: Fraction  # J(sigma)-seminorm of f* over sub-intervals
    rhs: Fraction  # J(s)-seminorm of f over the family
    interval: tuple
    sigma: object
    s: object

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


def _require_nonnegative_integers(f: GridFunction):
    for v in f.values:
        if v < 0:
            raise NegativeValues("f must be non-negative")
        if as_fraction(v).denominator != 1:
            raise PreconditionError("f must be integer-valued")


def rearrangement_transfer_check(
    f: GridFunction,
    Q: Region | None = None,
    kind="cubes",
    s=None,
    sigma=Fraction(23, 50),
    tau=None,
    refine: int = 0,
    trusted: bool = False,
) -> TransferCheck:
    """``||f*||_(J, sigma) <= ||f||_(J, s)`` for integer-valued ``f`` with seminorm at most 1/2."""
    kind = CollectionKind.parse(kind)
    _require_nonnegative_integers(f)
    d = f.spec.dim
    ct, cs = certified_pair(1 if kind is CollectionKind.INTERVALS else d, kind)
    tau, s = require_supported_pair(ct if tau is None else tau, cs if s is None else s, d, kind, trusted)
    sig = Surd.coerce(sigma)
    if not transfer_sigma_floor(tau) < sig <= Fraction(1, 2):
        raise PreconditionError(f"sigma must lie in ({float(transfer_sigma_floor(tau)):.6f}, 1/2]")
    s_j = s.a if s.is_rational else s
    rhs = seminorm_over(f, kind, lambda w: j_of_sample(w, s_j), refine, Q).value
    if rhs > Fraction(1, 2):
        raise HypothesisViolated(f"J-seminorm {rhs} exceeds 1/2")
    h = rearrange(f, Q)
    lhs, arg = interval_j_seminorm(h, sig.a if sig.is_rational else sig)
    return TransferCheck(lhs, rhs, arg, sig, s)


# ---------------------------------------------------------------- converse probe


@dataclass
class NinverseReport:
    swapped: bool
    tau_implied: object
    admissible: bool
    f_star: StepFunction
    f_star_seminorm: Fraction
    f_star_interval: tuple
    f_seminorm: Fraction
    inequality_holds: bool
    witness: Region | None = None
    witness_j: Fraction | None = None
    witness_fractions: tuple | None = None
    balance_holds: bool | None = None

    def as_dict(self) -> dict:
        return {
            "swapped": self.swapped,
            "tau_implied": None if self.tau_implied is None else str(self.tau_implied),
            "admissible": self.admissible,
            "f_star": [[str(w), str(v)] for w, v in self.f_star.to_pairs()],
            "f_star_seminorm": str(self.f_star_seminorm),
            "f_seminorm": str(self.f_seminorm),
            "inequality_holds": self.inequality_holds,
            "witness": None if self.witness is None else {"level": self.witness.level, "corner": list(self.witness.corner), "sides": list(self.witness.sides)},
            "witness_j": None if self.witness_j is None else str(self.witness_j),
            "witness_fractions": None if self.witness_fractions is None else [str(x) for x in self.witness_fractions],
            "balance_holds": self.balance_holds,
        }


def ninverse_probe(part: TriPartition, sigma, s, kind="cubes", refine: int = 0) -> NinverseReport:
    """Build ``f = 2 chi(E-) + chi(G)`` and, when the rearranged inequality holds, extract a balanced region."""
    kind = CollectionKind.parse(kind)
    s = JsParams(s).s
    sig = JsParams(sigma).s
    swapped = part.minus.measure() > part.plus.measure()
    if swapped:
        part = part.swapped()
    E_plus, E_minus, G = part.plus, part.minus, part.rest
    lp, lm, lg = E_plus.measure(), E_minus.measure(), G.measure()
    tau_star = None if lg == 0 else min(lp, lm) / lg
    # sigma < tau/(1+2tau) for some admissible tau < tau_star
    admissible = lm > 0 and (tau_star is None and sig < Fraction(1, 2) or tau_star is not None and sig < tau_star / (1 + 2 * tau_star))
    spec = E_plus.spec
    f = GridFunction(spec, tuple(Fraction(2 if i in E_minus else 1 if i in G else 0) for i in range(spec.cell_count)), True)
    h = rearrange(f)
    fs, farg = interval_j_seminorm(h, sig)
    res = seminorm_over(f, kind, lambda w: j_of_sample(w, s), refine)
    rep = NinverseReport(swapped, tau_star, admissible, h, fs, farg, res.value, fs <= res.value)
    if rep.inequality_holds and res.value > 0:
        W = res.region
        rep.witness = W
        rep.witness_j = res.value
        rep.witness_fractions = (fraction_in(E_plus, W), fraction_in(E_minus, W))
        rep.balance_holds = min(rep.witness_fractions) >= s
    return rep


# ---------------------------------------------------------------- constant calculus

_CENTERS = ("mean", "median")
_COMPARISONS = ("strict", "non-strict")
_SEMINORMS = ("O", "A", "D", "J")
# c with N <= c * N' for the pairs of averaging seminorms
_RATIO = {
    ("O", "O"): 1, ("O", "A"): 1, ("O", "D"): 1,
    ("A", "A"): 1, ("A", "D"): 1, ("A", "O"): 2,
    ("D", "D"): 1, ("D", "O"): 2, ("D", "A"): 2,
}


@dataclass(frozen=True)
class JnConstants:
    """``lambda({|f - centre| > alpha}) <= B lambda(E) exp(-b alpha / N(f))``.

    Derived constants remember the inequality they came from as
    ``b = b_factor * origin.b`` and ``B = origin.B * exp(e_power * origin.b)``.
    """

    b: float
    B: float
    center: str = "mean"
    comparison: str = "strict"
    seminorm: str = "A"
    s: Fraction | None = None
    origin: "JnConstants | None" = field(default=None, compare=False)
    b_factor: Fraction = Fraction(1)
    e_power: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.b > 0:
            raise InvalidConstants("b must be positive")
        if self.B < 1:
            raise InvalidConstants(f"B = {self.B} < 1 cannot satisfy the inequality at alpha = 0")
        if self.center not in _CENTERS or self.comparison not in _COMPARISONS or self.seminorm not in _SEMINORMS:
            raise InvalidConstants(f"unknown form {self.form}")
        if (self.seminorm == "J") != (self.s is not None):
            raise InvalidConstants("s is required exactly for the J seminorm")

    @property
    def form(self) -> tuple:
        return (self.center, self.comparison, self.seminorm, self.s)

    @property
    def root(self) -> "JnConstants":
        return self.origin if self.origin is not None else self

    def symbolic(self) -> str:
        return f"b = {self.b_factor} * b0, B = B0 * exp({self.e_power} * b0)"

    def as_dict(self) -> dict:
        return {
            "b": repr(self.b),
            "B": repr(self.B),
            "center": self.center,
            "comparison": self.comparison,
            "seminorm": self.seminorm,
            "s": None if self.s is None else str(self.s),
            "b_factor": str(self.b_factor),
            "e_power": str(self.e_power),
            "symbolic": self.symbolic(),
        }


def _b_factor(src: JnConstants, seminorm: str, s) -> Fraction:
    a, b = src.seminorm, seminorm
    if a == "J" and b == "J":
        if s > src.s:
            raise InvalidConstants("J(s) does not control J(s') for s' > s")
        return Fraction(1)
    if b == "J":
        raise InvalidConstants("no averaging seminorm is controlled by a J seminorm")
    if a == "J":
        # J(s) <= O/s <= A/s <= D/s
        return as_fraction(src.s)
    return Fraction(1, _RATIO[(a, b)])


def _direct(src: JnConstants, center: str, comparison: str, seminorm: str, s) -> JnConstants:
    bf = _b_factor(src, seminorm, s)
    ep = Fraction(0)
    if center != src.center:
        if "J" in (seminorm, src.seminorm):
            raise InvalidConstants("the centre swap needs |mean - median| <= N(f), false for J")
        ep = bf
    b = float(bf) * src.b
    B = src.B * math.exp(float(ep) * src.b)
    return JnConstants(b, B, center, comparison, seminorm, s, src, bf, ep)


def convert_constants(c: JnConstants, center: str | None = None, comparison: str | None = None,
                      seminorm: str | None = None, s=None) -> JnConstants:
    """Constants for another form of the inequality, always derived from ``c.root``.

    The seminorm swap is applied before the centre swap, so the factor
    ``exp(b')`` uses the possibly halved ``b'``.  Deriving from the root keeps
    every composition inside ``b/2 <= b' <= b``, ``B <= B' <= e^b B``.
    """
    root = c.root
    center = center or c.center
    comparison = comparison or c.comparison
    seminorm = seminorm or c.seminorm
    if seminorm == "J":
        s = as_fraction(s if s is not None else c.s)
    else:
        s = None
    if (center, comparison, seminorm, s) == root.form:
        return root
    return _direct(root, center, comparison, seminorm, s)


def chain_conversions(c: JnConstants, targets, from_root: bool = True) -> list[JnConstants]:
    """Apply a sequence of target forms (dicts of keyword arguments).

    With ``from_root=False`` each step starts from the previous result, so
    the centre-swap factor compounds (``e^{2b}`` after a round trip).
    """
    out, cur = [], c
    for t in targets:
        if from_root:
            cur = convert_constants(cur, **t)
        else:
            base = replace(cur, origin=None, b_factor=Fraction(1), e_power=Fraction(0))
            nxt = convert_constants(base, **t)
            cur = replace(
                nxt,
                origin=c.root,
                b_factor=nxt.b_factor * cur.b_factor,
                e_power=cur.e_power + nxt.e_power * cur.b_factor,
            )
        out.append(cur)
    return out


def wik_constants(d: int) -> JnConstants:
    """Median-form constants ``b = ln2 / (32 (2 + 6 sqrt(d/pi)))``, ``B = 2``."""
    b = math.log(2) / (32 * (2 + 6 * math.sqrt(d / math.pi)))
    return JnConstants(b, 2.0, center="median", comparison="non-strict", seminorm="A")


@dataclass(frozen=True)
class DecayProfile:
    """``prefactor * lambda(Q) * exp(-exponent * alpha / seminorm)``."""

    label: str
    prefactor: float
    exponent: float
    prefactor_expr: str
    exponent_expr: str

    def __call__(self, alpha, seminorm, measure=1.0) -> float:
        return self.prefactor * float(measure) * math.exp(-self.exponent * float(alpha) / float(seminorm))

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "prefactor": repr(self.prefactor),
            "exponent": repr(self.exponent),
            "prefactor_expr": self.prefactor_expr,
            "exponent_expr": self.exponent_expr,
        }


def wik_comparison(d: int = 1) -> tuple[DecayProfile, DecayProfile]:
    """Special-rectangle decay from the certified pair at ``r = 1/(2 tau)`` next to Wik's."""
    if d < 1:
        raise PreconditionError("d must be positive")
    tau = math.sqrt(2) - 1
    s = (3 - 2 * math.sqrt(2)) / 2
    r = 1 / (2 * tau)
    ours = DecayProfile(
        "certified-pair",
        mainjs_prefactor(r),
        s * math.log(r) / 8,
        "2/sqrt(2*sqrt(2)-2)",
        "(3-2*sqrt(2))*ln(1/(2*sqrt(2)-2))/16",
    )
    wik = DecayProfile("wik", 2.0, math.log(2) / 16, "2", "ln(2)/16")
    return ours, wik
