"""Command-line front end.

Exit codes: 0 success, 1 invalid input or infeasible assignment, 2 no
isolated cluster, 3 an experiment observed a ratio below the guarantee.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .clusters import effective_capacities
from .experiment import ALGORITHMS, run_experiment
from .generate import GeneratorParams, generate
from .io import assignment_to_document, dumps, parse_assignment, parse_instance, serialize_instance, to_rational
from .lp import build_mcpk_lp, to_lp_text
from .mkpc import NoIsolatedCluster, detect_disentangled, greedy_lp
from .model import Kind, ValidationError, check_feasible, evaluate_assignment
from .oracle import OracleLimitExceeded
from .pipage import PreconditionError

EXIT_OK, EXIT_INVALID, EXIT_NOT_ISOLATED, EXIT_GUARANTEE = 0, 1, 2, 3
SOLVERS = ["mcpk-pipage", "mcpc", "mkpc-greedy", "mkpc-third", "mkpc-iterative", "exact"]


def _read(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _range(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def _greedy_document(inst, g) -> dict:
    return {
        "lp_value": g.objective,
        "x": [{"set": j, "knapsack": k, "value": v} for (j, k), v in sorted(g.x.items())],
        "split_items": sorted(g.split_items),
        "unsplit_items": sorted(g.unsplit_items),
        "split_of": {k: g.split_of[k] for k in sorted(g.split_of)},
        "residual": {k: g.residual[k] for k in sorted(g.residual)},
    }


def cmd_solve(args) -> int:
    inst = parse_instance(_read(args.input))
    if args.dump_lp:
        Path(args.dump_lp).write_text(to_lp_text(build_mcpk_lp(inst, effective_capacities(inst))))
    if args.alg == "mkpc-greedy":
        _write(args.out, dumps(_greedy_document(inst, greedy_lp(inst))))
        return EXIT_OK
    if args.alg == "mkpc-iterative" and detect_disentangled(inst, strict=True) is None:
        print("warning: capacity bands are not strictly ordered; the one-half guarantee is not certified",
              file=sys.stderr)
    res = ALGORITHMS[args.alg].solve(inst)
    doc = assignment_to_document(inst, res.assignment, res.value)
    doc["algorithm"] = args.alg
    doc["certificate"] = res.certificate
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_generate(args) -> int:
    params = GeneratorParams(
        Kind(args.kind), args.n, args.m, args.p, args.q, args.seed,
        args.cost_range, args.profit_range, args.tightness, args.disentangled,
    )
    _write(args.out, serialize_instance(generate(params)).decode("utf-8"))
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = parse_instance(_read(args.input))
    a, claimed = parse_assignment(Path(args.assignment).read_bytes())
    report = check_feasible(inst, a)
    value = evaluate_assignment(inst, a)
    ok = report.feasible and (claimed is None or claimed == value)
    if args.json:
        _write(args.out, dumps({
            "feasible": report.feasible,
            "value": value,
            "claimed_value": claimed,
            "violations": [v.describe() for v in report.violations],
        }))
    else:
        lines = [f"value {value}", "feasible" if report.feasible else "infeasible"]
        lines += [v.describe() for v in report.violations]
        if claimed is not None and claimed != value:
            lines.append(f"claimed value {claimed} does not match")
        _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_experiment(args) -> int:
    base = GeneratorParams(
        Kind(args.kind), args.n, args.m, args.p, args.q, args.seed,
        args.cost_range, args.profit_range, args.tightness, args.disentangled,
    )
    report = run_experiment(args.alg, base, args.trials, workers=args.workers)
    _write(args.out, report.to_csv(runtime=not args.no_runtime))
    summary = report.summary()
    if args.json:
        sys.stderr.write(dumps(summary))
    else:
        s = summary
        print(
            f"{s['algorithm']}: {s['completed']}/{s['trials']} trials, min ratio {s['min_ratio']}"
            f" (~{s['min_ratio_decimal']}), mean ~{s['mean_ratio_decimal']},"
            f" guarantee {s['guarantee']}, violations {s['violations']}, skipped {s['skipped']}",
            file=sys.stderr,
        )
    return EXIT_GUARANTEE if report.violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", default="-", help="input file (default: stdin)")
    common.add_argument("--out", default="-", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable reports")

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--kind", choices=[k.value for k in Kind], default="mcpc")
    gen.add_argument("-n", type=int, default=5, help="items")
    gen.add_argument("-m", type=int, default=5, help="sets")
    gen.add_argument("-p", type=int, default=4, help="knapsacks")
    gen.add_argument("-q", type=int, default=2, help="clusters")
    gen.add_argument("--cost-range", type=_range, default=(1, 5), metavar="LO:HI")
    gen.add_argument("--profit-range", type=_range, default=(1, 9), metavar="LO:HI")
    gen.add_argument("--tightness", type=lambda s: to_rational(s, "tightness"), default=Fraction(1))
    gen.add_argument("--disentangled", action="store_true")

    parser = argparse.ArgumentParser(prog="mcpc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve an instance")
    p.add_argument("--alg", choices=SOLVERS, required=True)
    p.add_argument("--dump-lp", metavar="PATH", help="write the reduced-budget LP in LP-text format")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", parents=[common, gen], help="write a random instance")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", parents=[common], help="check an assignment against an instance")
    p.add_argument("--assignment", required=True, help="assignment JSON, e.g. the output of solve")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", parents=[common, gen], help="ratio sweep against the exact optimum")
    p.add_argument("--alg", choices=sorted(ALGORITHMS), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-runtime", action="store_true", help="leave the runtime column empty")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoIsolatedCluster as exc:
        print(f"error: no isolated cluster ({exc})", file=sys.stderr)
        return EXIT_NOT_ISOLATED
    except (ValidationError, PreconditionError, OracleLimitExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
