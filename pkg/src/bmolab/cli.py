"""Command line front end.

Exit codes: 0 ok, 1 verification failure, 2 parse error, 3 precondition
failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .corpus import function_corpus, tripartition_corpus
from .decomposition_geometry import DecompositionSpec, chain_descent, certified_pair
from .errors import BudgetExceeded, PreconditionError
from .grid_core import CollectionKind, GridSpec, sample
from .inequality_harness import (
    JnConstants,
    convert_constants,
    mainjs_seminorms,
    phi,
    rearrangement_transfer_check,
    verify_mainjs,
    wik_comparison,
    wik_constants,
)
from .john_stromberg import j_of_sample
from .oscillation_median import oscillation_of_sample, seminorm_over
from .pair_search import frontier_search, question_b_experiment
from .rearrangement import distribution, rearrange
from .serialize import (
    ParseError,
    load_function,
    load_partition,
    parse_number,
    parse_region,
    region_to_json,
    write_csv,
    write_json,
)
from .surd import Surd

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_PRECONDITION, EXIT_BUDGET = 0, 1, 2, 3, 4


def _emit(obj, out: Path | None, name: str):
    if out is not None:
        write_json(out / name, obj)
    print(json.dumps(json.loads(json.dumps(obj, default=str)), sort_keys=True, indent=2))


def _functional(flavor: str, s):
    if flavor == "J":
        return lambda ws: j_of_sample(ws, s)
    return lambda ws: oscillation_of_sample(ws).get(flavor)


# ---------------------------------------------------------------- subcommands


def cmd_functional(args) -> int:
    f = load_function(args.input)
    region = parse_region(args.region, f.spec.dim)
    s = _surd_arg(args.s)
    fn = _functional(args.flavor, s)
    value = fn(sample(f, region))
    res = seminorm_over(f, CollectionKind.parse(args.kind), fn, args.refine, region)
    config = {"input": str(args.input), "flavor": args.flavor, "s": args.s, "kind": args.kind,
              "refine": args.refine, "region": args.region}
    body = {"config": config, "value": str(value), "value_float": float(value),
            "seminorm": str(res.value), "maximiser": region_to_json(res.region)}
    out = _outdir(args)
    _emit(body, out, "functional.json")
    if out is not None:
        from .plots import plot_rearrangement

        plot_rearrangement(f.values, rearrange(f, region), out / "rearrangement.png")
    return EXIT_OK


def cmd_rearrange(args) -> int:
    f = load_function(args.input)
    region = parse_region(args.region, f.spec.dim)
    h = rearrange(f, region)
    dist = distribution(f, region)
    body = {
        "config": {"input": str(args.input), "region": args.region},
        "pieces": [[str(w), str(v)] for w, v in h.to_pairs()],
        "distribution": [[str(v), str(m)] for v, m in zip(dist.levels, dist.tail)],
    }
    out = _outdir(args)
    _emit(body, out, "rearrangement.json")
    if out is not None:
        from .plots import plot_rearrangement

        write_csv(out / "rearrangement.csv", [{"length": w, "value": v} for w, v in h.to_pairs()], ["length", "value"])
        plot_rearrangement(f.values, h, out / "rearrangement.png")
    return EXIT_OK


def cmd_balance(args) -> int:
    part = load_partition(args.input)
    rule = DecompositionSpec(args.rule)
    cert = chain_descent(part, rule, _surd_arg(args.tau))
    body = {"config": {"input": str(args.input), "rule": args.rule, "tau": args.tau},
            "certificate": cert.as_dict(), "recheck": cert.recheck(part)}
    out = _outdir(args)
    _emit(body, out, "certificate.json")
    if out is not None:
        from .plots import plot_labels

        plot_labels(part.spec, part.labels(), out / "certificate.png", cert.region, f"case {cert.case}")
    return EXIT_OK if body["recheck"] else EXIT_VERIFY


_SEARCH_KEYS = ("tau", "d", "L", "refine", "kind", "strategy", "budget", "seed")


def _search_config(args) -> dict:
    cfg = {"tau": "sqrt2-1", "d": 1, "L": 2, "refine": 0, "kind": "cubes", "strategy": "exhaustive",
           "budget": 10**5, "seed": 0}
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read campaign config: {exc}") from exc
    for k in _SEARCH_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    unknown = set(cfg) - set(_SEARCH_KEYS) - {"nonstrict", "shard_size", "chains"}
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    cfg["nonstrict"] = bool(cfg.get("nonstrict", False) or args.nonstrict)
    return cfg


def cmd_search(args) -> int:
    cfg = _search_config(args)
    kw = {}
    for k in ("shard_size", "chains"):
        if k in cfg:
            kw[k] = int(cfg[k])
    rep = frontier_search(
        str(cfg["tau"]), int(cfg["d"]), int(cfg["L"]), cfg["kind"], cfg["strategy"], int(cfg["refine"]),
        int(cfg["budget"]), seed=cfg["seed"], workers=args.workers, checkpoint=args.checkpoint,
        nonstrict=cfg["nonstrict"], max_shards=args.max_shards, **kw,
    )
    body = {"config": cfg, "report": rep.as_dict()}
    out = _outdir(args)
    _emit(body, out, "report.json")
    if out is not None:
        from .plots import plot_batches, plot_labels

        write_json(out / "timing.json", {"wall_time": rep.wall_time})
        write_csv(out / "batches.csv", rep.batches)
        if rep.batches:
            plot_batches(rep.batches, out / "batches.png")
        if rep.worst_labels is not None:
            plot_labels(GridSpec(rep.d, rep.L), rep.worst_labels, out / "worst.png", rep.worst_region,
                        f"worst configuration, score {rep.s_hat}")
    return EXIT_OK


def cmd_minimal(args) -> int:
    res = question_b_experiment(args.d, args.L, parse_number(args.tau_prime), args.trials, args.seed, args.refine)
    config = {"d": args.d, "L": args.L, "tau_prime": args.tau_prime, "trials": args.trials, "seed": args.seed,
              "refine": args.refine}
    body = {"config": config, **{k: v for k, v in res.items() if k != "rows"}}
    out = _outdir(args)
    _emit(body, out, "question_b.json")
    if out is not None:
        from .plots import plot_defects

        write_json(out / "question_b_rows.json", res["rows"])
        write_csv(out / "defects.csv", res["rows"], ["trial", "outcome", "defect", "fap_gap", "fap_holds", "plus_hex", "minus_hex"])
        defects = [Fraction(r["defect"]) for r in res["rows"] if r["outcome"] == "minimal"]
        plot_defects(defects, out / "defects.png", Fraction(res["one_cell"]) if "one_cell" in res else None)
    bad = args.d == 1 and not res["defect_within_one_cell"]
    return EXIT_VERIFY if bad else EXIT_OK


def _verify_config(args) -> dict:
    cfg = {"seed": 0, "count": 20, "d": 1, "L": 5, "kind": "cubes", "max_value": 5, "s_scale": "1"}
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read corpus config: {exc}") from exc
    for k in ("seed", "count", "d", "L", "kind", "max_value", "s_scale"):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def cmd_verify(args) -> int:
    cfg = _verify_config(args)
    d, L, kind = int(cfg["d"]), int(cfg["L"]), CollectionKind.parse(cfg["kind"])
    scale = parse_number(cfg["s_scale"])
    if scale <= 0:
        raise PreconditionError("s_scale must be positive")
    tau, s0 = certified_pair(1 if kind is CollectionKind.INTERVALS else d, kind)
    s = s0 * scale
    trusted = scale != 1
    rule = DecompositionSpec.for_kind(kind)
    rows, worst = [], None
    for i, f in enumerate(function_corpus(d, L, int(cfg["count"]), int(cfg["seed"]), int(cfg["max_value"]))):
        norms = mainjs_seminorms(f, None, kind, s)
        for r_name, r in (("1", 1), ("max", None)):
            rj, ro = verify_mainjs(f, None, kind, tau, s, r, trusted=trusted, seminorms=norms)
            for rep in (rj, ro):
                rows.append({"check": rep.label, "item": i, "r": r_name, "pass": rep.passed, "min_slack": rep.min_slack})
                if worst is None or rep.min_slack < worst[0].min_slack:
                    worst = (rep, rj, ro)
        q = f.map(lambda v: phi(v - min(f.values)), integer_valued=True)
        try:
            tc = rearrangement_transfer_check(q, None, kind, s, Fraction(23, 50), tau, trusted=trusted)
            rows.append({"check": "transfer", "item": i, "pass": tc.passed, "min_slack": float(tc.slack)})
        except PreconditionError:
            rows.append({"check": "transfer", "item": i, "pass": None, "min_slack": None})
    for i, part in enumerate(tripartition_corpus(d, L, int(cfg["count"]), int(cfg["seed"]), tau)):
        cert = chain_descent(part, rule, tau)
        ok = cert.recheck(part) and cert.min_fraction >= s
        rows.append({"check": "certificate", "item": i, "pass": ok, "min_slack": float(cert.min_fraction - s)})
    failures = [r for r in rows if r["pass"] is False]
    by_check = {}
    for r in rows:
        c = by_check.setdefault(r["check"], {"checked": 0, "failed": 0, "skipped": 0})
        if r["pass"] is None:
            c["skipped"] += 1
        else:
            c["checked"] += 1
            c["failed"] += r["pass"] is False
    body = {"config": cfg, "tau": str(tau), "s": str(s), "s_float": float(s), "checks": by_check,
            "failures": len(failures), "pass": not failures}
    out = _outdir(args)
    _emit(body, out, "verify.json")
    if out is not None:
        from .plots import plot_margins

        write_csv(out / "checks.csv", rows, ["check", "item", "r", "pass", "min_slack"])
        if worst is not None:
            plot_margins([worst[1], worst[2]], out / "margins.png", "tightest function in the corpus")
    return EXIT_OK if not failures else EXIT_VERIFY


def cmd_convert(args) -> int:
    if args.wik is not None:
        src = wik_constants(args.wik)
    else:
        src = JnConstants(float(parse_number(args.b)), float(parse_number(args.B)), args.center, args.comparison, args.seminorm,
                          parse_number(args.s) if args.s is not None else None)
    dst = convert_constants(src, args.to_center, args.to_comparison, args.to_seminorm,
                            parse_number(args.to_s) if args.to_s is not None else None)
    body = {"from": src.as_dict(), "to": dst.as_dict(),
            "envelope": {"b_ratio": dst.b / src.b, "B_ratio": dst.B / src.B}}
    if args.wik is not None:
        ours, wik = wik_comparison(args.wik)
        body["decay"] = {"ours": ours.as_dict(), "wik": wik.as_dict()}
    _emit(body, _outdir(args), "constants.json")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _surd_arg(text):
    try:
        return Surd.coerce(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse number {text!r}") from exc


def _outdir(args) -> Path | None:
    return Path(args.out) if getattr(args, "out", None) else None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmolab", description="Oscillation functionals, balancing searches and tail-bound checks on dyadic grids.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        if out:
            sp.add_argument("--out", help="directory for JSON/CSV reports and figures")
        return sp

    sp = common(sub.add_parser("functional", help="one functional on a region and its seminorm"))
    sp.add_argument("input")
    sp.add_argument("--flavor", choices=("O", "A", "D", "J"), default="O")
    sp.add_argument("--s", default="1/2")
    sp.add_argument("--kind", default="cubes")
    sp.add_argument("--refine", type=int, default=0)
    sp.add_argument("--region", help="level:c1,...:s1,... (default: unit cube)")
    sp.set_defaults(func=cmd_functional)

    sp = common(sub.add_parser("rearrange", help="decreasing rearrangement and distribution"))
    sp.add_argument("input")
    sp.add_argument("--region")
    sp.set_defaults(func=cmd_rearrange)

    sp = common(sub.add_parser("balance", help="balancing certificate for a three-set partition"))
    sp.add_argument("input")
    sp.add_argument("--tau", default="sqrt2-1")
    sp.add_argument("--rule", choices=("dyadic", "false_cube"), default="dyadic")
    sp.set_defaults(func=cmd_balance)

    sp = common(sub.add_parser("search-pair", help="frontier search for balancing constants"))
    sp.add_argument("--config", help="campaign JSON {tau, d, L, refine, kind, strategy, budget, seed}")
    sp.add_argument("--tau")
    sp.add_argument("--d", type=int)
    sp.add_argument("--L", type=int)
    sp.add_argument("--refine", type=int)
    sp.add_argument("--kind")
    sp.add_argument("--strategy", choices=("exhaustive", "anneal"))
    sp.add_argument("--budget", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--nonstrict", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--checkpoint")
    sp.add_argument("--max-shards", type=int, help="stop after this many new shards (resume later)")
    sp.set_defaults(func=cmd_search)

    sp = common(sub.add_parser("minimal", help="equality defects at minimal cubes"))
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--L", type=int, default=6)
    sp.add_argument("--tau-prime", default="3/10")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--refine", type=int, default=0)
    sp.set_defaults(func=cmd_minimal)

    sp = common(sub.add_parser("verify", help="tail bounds, transfer and certificates over a corpus"))
    sp.add_argument("--config", help="corpus JSON {seed, count, d, L, kind, max_value, s_scale}")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--L", type=int)
    sp.add_argument("--kind")
    sp.add_argument("--max-value", dest="max_value", type=int)
    sp.add_argument("--s-scale", dest="s_scale", help="multiply the certified s (2 is a negative control)")
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("convert", help="convert inequality constants between forms"))
    sp.add_argument("--b")
    sp.add_argument("--B")
    sp.add_argument("--center", choices=("mean", "median"), default="mean")
    sp.add_argument("--comparison", choices=("strict", "non-strict"), default="strict")
    sp.add_argument("--seminorm", choices=("O", "A", "D", "J"), default="A")
    sp.add_argument("--s")
    sp.add_argument("--to-center", choices=("mean", "median"))
    sp.add_argument("--to-comparison", choices=("strict", "non-strict"))
    sp.add_argument("--to-seminorm", choices=("O", "A", "D", "J"))
    sp.add_argument("--to-s")
    sp.add_argument("--wik", type=int, metavar="D", help="start from the special-rectangle constants in dimension D")
    sp.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "convert" and args.wik is None and (args.b is None or args.B is None):
        parser.error("convert needs --b and --B, or --wik D")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PreconditionError as exc:
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
