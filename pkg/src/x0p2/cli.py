"""Command-line entry point: ``x0p2 model|invariants|verify``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import arakcheck as ak
from .exactkernel import fmt
from .fibermodel import CLASSES, InvalidPrime, classify_prime, count_nodes, minimal_model
from .mginv import graph_report
from .redgraph import betti1, dual_graph, genus_oracle, to_dot
from .verify import run_verification, to_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class Config:
    pmax: int
    classes: tuple[int, ...] = CLASSES
    format: str = "csv"
    out: str | None = None
    jobs: int = 1
    verbose: bool = False

    def __post_init__(self):
        if self.pmax < 7:
            raise ValueError("--pmax must be at least 7")
        if self.jobs < 1:
            raise ValueError("--jobs must be at least 1")
        if not set(self.classes) <= set(CLASSES):
            raise ValueError(f"--classes must be drawn from {CLASSES}")


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default_jobs() -> int:
    try:
        return int(os.environ.get("X0P2_JOBS", "1"))
    except ValueError:
        return 1


def cmd_model(args) -> int:
    m = minimal_model(args.p)
    if args.format == "dot":
        text = to_dot(dual_graph(m), name=f"G_p{args.p}")
    elif args.format == "json":
        text = json.dumps(m.to_json(), indent=1) + "\n"
    else:
        raise SystemExit(f"model: unsupported format {args.format}")
    _emit(text, args.out)
    return EXIT_OK


def invariants(p: int, verbose: bool = False) -> dict:
    rc = classify_prime(p)
    m = minimal_model(p)
    g = dual_graph(m)
    report = {"p": p, "class": rc.cls, "k": rc.k, "genus": genus_oracle(p),
              "s": count_nodes(m)}
    report.update(graph_report(g, verbose=verbose))
    report["betti1"] = betti1(g)
    report["s_term"] = fmt(ak.faltings_s_term(p).value)
    report["unit"] = ak.UNIT
    if ak.generic_range(p):
        dp = ak.divisor_pairings(p)
        copies = ak.fiber_copies(p)
        report["pairings"] = {
            "per_fiber_log_p2": {"V0V0": fmt(dp.v0v0.in_log_p2), "V0Vinf": fmt(dp.v0vinf.in_log_p2),
                                 "VinfVinf": fmt(dp.vinfvinf.in_log_p2)},
            "fiber_copies": copies,
            "total_log_p": {"V0V0": fmt(copies * dp.v0v0.value), "V0Vinf": fmt(copies * dp.v0vinf.value)},
        }
    else:
        report["pairings_absent_reason"] = "out of generic range"
    if p >= 11:
        report["correction"] = fmt(ak.admissible_correction(p).value)
        report["asymptotics"] = ak.asymptotic_report(p)
    else:
        report["correction_absent_reason"] = "defined for p >= 11"
    return report


def cmd_invariants(args) -> int:
    _emit(json.dumps(invariants(args.p, args.verbose), indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cfg = Config(pmax=args.pmax, classes=tuple(args.classes), format=args.format or "csv",
                     out=args.out, jobs=args.jobs, verbose=args.verbose)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outcome = run_verification(cfg.pmax, cfg.classes, cfg.jobs)
    _emit(to_csv(outcome), cfg.out)
    err = sys.stderr
    print(f"checked {len(outcome.results)} primes <= {cfg.pmax}", file=err)
    print("== polynomial recovery ==", file=err)
    for rec in outcome.recoveries:
        print(json.dumps(rec), file=err)
    print("== errata / warnings ==", file=err)
    for line in outcome.warnings:
        print(line, file=err)
    if outcome.violations:
        print("== violations ==", file=err)
        for line in outcome.violations:
            print(line, file=err)
    if cfg.out:
        report = {"pmax": cfg.pmax, "classes": list(cfg.classes), "recoveries": outcome.recoveries,
                  "warnings": outcome.warnings, "violations": outcome.violations}
        with open(cfg.out + ".report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=1)
            fh.write("\n")
    return EXIT_OK if outcome.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="x0p2", description=(
        "Special fibers of the minimal regular models of X0(p^2) and their exact invariants."))
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--verbose", action="store_true")

    p_model = sub.add_parser("model", parents=[common], help="serialize a fiber model or its dual graph")
    p_model.add_argument("--p", type=int, required=True)
    p_model.add_argument("--format", choices=["json", "dot"], default="json")
    p_model.set_defaults(func=cmd_model)

    p_inv = sub.add_parser("invariants", parents=[common], help="JSON report of the invariants at p")
    p_inv.add_argument("--p", type=int, required=True)
    p_inv.set_defaults(func=cmd_invariants)

    p_ver = sub.add_parser("verify", parents=[common], help="verify every prime up to --pmax, CSV out")
    p_ver.add_argument("--pmax", type=int, required=True)
    p_ver.add_argument("--classes", type=int, nargs="+", default=list(CLASSES), choices=CLASSES)
    p_ver.add_argument("--format", choices=["csv"], default="csv")
    p_ver.add_argument("--jobs", type=int, default=_default_jobs())
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidPrime as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
