"""Command-line front end: instance generation, single solves, experiment
suites, and trace dumps."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .harness import (ALGOS, ExperimentConfig, evaluate_row, run_suite,
                      solve_instance)
from .generators import gen_family
from .instances import SteinerInstance
from .moat_central import moat_grow_exact, moat_grow_rounded
from .sim import word_budget


def _load_instance(path: str) -> SteinerInstance:
    return SteinerInstance.from_text(Path(path).read_text())


def _parse_spec(arg: str) -> dict:
    if arg.startswith("{"):
        return json.loads(arg)
    return json.loads(Path(arg).read_text())


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-words", type=int, default=8)
    p.add_argument("--round-cap", type=int, default=200_000)
    p.add_argument("--out", default=None)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    spec = _parse_spec(args.spec)
    spec.setdefault("seed", args.seed)
    chunks = [inst.to_text() for inst in gen_family(spec)]
    _emit("\n".join(chunks), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    eps = Fraction(args.eps) if args.eps else None
    with word_budget(args.budget_words):
        sol, rounds, messages, mp, gp, dual = solve_instance(
            inst, args.algo, eps, args.seed)
    out = {
        "algorithm": args.algo,
        "weight": sol.weight,
        "feasible": sol.feasible,
        "edges": sorted(list(e) for e in sol.edges),
        "rounds": rounds,
        "messages": messages,
        "merge_phases": mp,
        "growth_phases": gp,
        "dual_lower_bound": None if dual is None else str(dual),
    }
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if sol.feasible else 1


def cmd_suite(args) -> int:
    config = ExperimentConfig.from_json_dict(_parse_spec(args.config))
    if args.out:
        config.out_csv = args.out
    report = run_suite(config)
    for line in report.failures:
        print(f"FAIL {line}")
    print(f"suite: {len(report.rows)} rows, "
          f"{'PASS' if report.passed else 'FAIL'}")
    if not args.out and not config.out_csv:
        sys.stdout.write(report.csv_text())
    return 0 if report.passed else 1


def cmd_trace(args) -> int:
    inst = _load_instance(args.instance).as_minimal_ic()
    if args.eps:
        _, trace, _ = moat_grow_rounded(inst, Fraction(args.eps))
    else:
        _, trace = moat_grow_exact(inst)
    _emit(trace.to_json() + "\n", args.out)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="steinerlab",
        description="Distributed Steiner forest laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instances from a family spec")
    p.add_argument("spec", help="JSON spec (inline or a file path)")
    _add_common(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance")
    p.add_argument("--algo", choices=ALGOS, default="central-exact")
    p.add_argument("--eps", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("suite", help="run an experiment suite config")
    p.add_argument("config", help="JSON config (inline or a file path)")
    _add_common(p)
    p.set_defaults(fn=cmd_suite)

    p = sub.add_parser("trace", help="dump the moat-growing trace")
    p.add_argument("instance")
    p.add_argument("--eps", default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_trace)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
