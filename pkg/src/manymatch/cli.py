"""Command-line interface.

Exit codes: 0 success, 2 infeasible instance, 3 invalid input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import bench, ratio_suite, scaling_suite
from .check import check
from .driver import MODES, SolveConfig, solve
from .errors import InfeasibleError, InvalidInputError
from .exact_oracle import DEFAULT_CAP, exact_mmm
from .geometry import LpMetric
from .instances import DISTRIBUTIONS, InstanceSpec, gen_instance
from .io import dumps, format_instance, read_edges, read_instance, solution_document
from .plot import plot_svg

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID = 0, 2, 3


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InvalidInputError(f"cannot write {out}: {exc}") from None


def _instance(args):
    if args.inp is None:
        raise InvalidInputError("--in is required")
    inst = read_instance(args.inp)
    p = args.norm if args.norm is not None else inst.p
    return inst, p


def cmd_solve(args) -> int:
    inst, p = _instance(args)
    cfg = SolveConfig(eps=args.eps, p=p, mode=args.mode, seed=args.seed, samples=args.samples)
    sol = solve(inst.points, cfg)
    stats = dict(sol.stats)
    if not args.timings:
        stats.pop("elapsed", None)
    params = {"eps": cfg.eps, "epsInternal": cfg.eps_internal, "p": cfg.p, "mode": cfg.mode, "seed": cfg.seed}
    _emit(dumps(solution_document(sol.cost, sol.edges, params, stats)), args.out)
    return EXIT_OK


def cmd_exact(args) -> int:
    inst, p = _instance(args)
    res = exact_mmm(inst.points, LpMetric(p), cap=args.cap, method=args.method)
    params = {"p": p, "method": res.method, "cap": args.cap}
    stats = {"n": inst.points.n, "d": inst.points.dim}
    _emit(dumps(solution_document(res.cost, res.edges, params, stats)), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = InstanceSpec(args.n, args.d, args.colors, args.distribution, args.seed)
    S = gen_instance(spec)
    _emit(format_instance(S, args.norm if args.norm is not None else 2.0), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.suite == "ratio":
        suite = ratio_suite(args.count, seed=args.seed)
    elif args.suite == "scaling":
        suite = scaling_suite(seed=args.seed)
    else:
        try:
            suite = json.loads(Path(args.suite).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise InvalidInputError(f"cannot read suite {args.suite}: {exc}") from None
    report = bench(suite, progress=(lambda row: print(json.dumps(row), file=sys.stderr)) if args.verbose else None)
    _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst, p = _instance(args)
    if args.edges is None:
        raise InvalidInputError("--edges is required")
    rep = check(inst.points, read_edges(args.edges), LpMetric(p))
    _emit(dumps(rep.as_dict()), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    inst, _ = _instance(args)
    E = read_edges(args.edges) if args.edges is not None else None
    _emit(plot_svg(inst.points, E), args.out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the invalid-input code (argparse would use 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="manymatch", description="Geometric many-to-many matching.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, io=True):
        if io:
            sp.add_argument("--in", dest="inp", help="instance file")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--norm", type=float, default=None, help="L_p norm (default: from the file, or 2)")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("solve", help="approximate minimum-cost matching")
    common(sp)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--mode", choices=MODES, default="certified")
    sp.add_argument("--samples", type=int, default=None, help="space offsets sampled in fast mode")
    sp.add_argument("--timings", action="store_true", help="include wall times (output no longer byte-stable)")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("exact", help="exact optimum for small instances")
    common(sp)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest n accepted")
    sp.add_argument("--method", choices=("covering", "matching"), default="covering")
    sp.set_defaults(fn=cmd_exact)

    sp = sub.add_parser("gen", help="generate a random instance")
    common(sp, io=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--colors", type=int, default=2)
    sp.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform")
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("bench", help="run a benchmark suite")
    common(sp, io=False)
    sp.add_argument("--suite", default="ratio", help="'ratio', 'scaling' or a JSON suite file")
    sp.add_argument("--count", type=int, default=200, help="cases in the ratio suite")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("check", help="validate an edge list")
    common(sp)
    sp.add_argument("--edges", help="solution document or JSON edge array")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("plot", help="render a planar instance as SVG")
    common(sp)
    sp.add_argument("--edges", help="solution document or JSON edge array")
    sp.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
