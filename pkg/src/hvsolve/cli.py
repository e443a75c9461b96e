"""Command-line interface: generate, solve, inspect, bench.

Exit code 0 means the command completed its contract; diagnostics go to
stderr. All randomized stages honor --seed (default fixed), so repeated
runs with identical inputs produce byte-identical templates.
"""

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import problems, runtime, template as template_io
from .basis_search import select_best
from .config import DEFAULT_SEED, Config
from .errors import (GenerationError, InstanceError, ProblemSyntaxError,
                     TemplateError)
from .poly import parse_system


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hvsolve",
                                     description="Hidden-variable sparse-resultant minimal solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="turn a problem file into a solver template")
    gen.add_argument("problem", type=Path)
    gen.add_argument("output", type=Path)
    gen.add_argument("--hidden", help="force this variable to be hidden")
    gen.add_argument("--eps", type=_fraction, default=Fraction(1, 1000),
                     help="displacement magnitude (exact rational, default 1/1000)")
    gen.add_argument("--rank-tol", type=float, default=1e-8)
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--max-subset-size", type=_positive_int)

    sol = sub.add_parser("solve", help="solve one coefficient instance with a template")
    sol.add_argument("template", type=Path)
    sol.add_argument("instance", type=Path)
    sol.add_argument("--keep-all", action="store_true",
                     help="also report invalid and indeterminate solutions")
    sol.add_argument("--no-reduce", action="store_true",
                     help="skip the recorded reduction, solve the full pencil")
    sol.add_argument("--residual-tol", type=float, default=1e-6)
    sol.add_argument("--pivot-tol", type=float, default=1e-12)
    sol.add_argument("--inf-tol", type=float, default=1e-10)
    sol.add_argument("--format", choices=("csv", "struct"), default="struct")

    ins = sub.add_parser("inspect", help="print template sizes and structure")
    ins.add_argument("template", type=Path)

    ben = sub.add_parser("bench", help="stability benchmark on a problem or builtin")
    ben.add_argument("target", help="problem file or builtin name (SYS-A, SYS-B, SYS-C)")
    ben.add_argument("outdir", type=Path, nargs="?", default=Path("bench-report"))
    ben.add_argument("--trials", type=_positive_int, required=True)
    ben.add_argument("--mode", choices=("random", "near_degenerate"), default="random")
    ben.add_argument("--gap", type=float, default=1e-2)
    ben.add_argument("--compare", action="store_true",
                     help="run both modes and report both medians")
    ben.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ben.add_argument("--eps", type=_fraction, default=Fraction(1, 1000))
    ben.add_argument("--rank-tol", type=float, default=1e-8)
    ben.add_argument("--residual-tol", type=float, default=1e-6)
    ben.add_argument("--pivot-tol", type=float, default=1e-12)
    ben.add_argument("--inf-tol", type=float, default=1e-10)
    ben.add_argument("--max-subset-size", type=_positive_int)
    ben.add_argument("--hidden")
    return parser


def cmd_generate(args) -> int:
    try:
        system = parse_system(args.problem.read_text())
    except (OSError, ProblemSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = Config(epsilon=args.eps, rank_tol=args.rank_tol, seed=args.seed,
                    max_subset_size=args.max_subset_size, forced_hidden=args.hidden)
    try:
        tpl = select_best(system, config)
    except GenerationError as exc:
        print(exc.diagnostics(), file=sys.stderr)
        return 1
    template_io.save(tpl, args.output)
    print(f"basis={len(tpl.basis)} gep={tpl.pencil_size} "
          f"reduced={tpl.reduced_size} hidden={tpl.hidden_name}")
    return 0


def _solution_records(solutions, variables, fmt):
    if fmt == "csv":
        cols = ["index", "valid", "indeterminate", "eigenvalue_re", "eigenvalue_im",
                "residual_max", "consistency"]
        for v in variables:
            cols += [f"{v}_re", f"{v}_im"]
        lines = [",".join(cols)]
        for i, s in enumerate(solutions):
            row = [str(i), str(s.valid).lower(), str(s.indeterminate).lower(),
                   f"{s.eigenvalue.real:.17g}", f"{s.eigenvalue.imag:.17g}",
                   f"{s.max_residual:.6g}", f"{s.consistency:.6g}"]
            for z in s.point:
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            lines.append(",".join(row))
        return lines
    lines = [f"solutions: {len(solutions)}"]
    for i, s in enumerate(solutions):
        flags = "valid" if s.valid else ("indeterminate" if s.indeterminate else "invalid")
        lines.append(f"solution {i}: {flags} residual_max={s.max_residual:.6g} "
                     f"consistency={s.consistency:.6g} eigenvalue={s.eigenvalue:.17g}")
        for v, z in zip(variables, s.point):
            lines.append(f"  {v} = {z.real:.17g} {z.imag:+.17g}i")
    return lines


def cmd_solve(args) -> int:
    try:
        tpl = template_io.load(args.template)
        instance = runtime.parse_instance(args.instance.read_text(), tpl)
    except (OSError, TemplateError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    options = runtime.SolveOptions(keep_all=args.keep_all, no_reduce=args.no_reduce,
                                   residual_tol=args.residual_tol,
                                   pivot_tol=args.pivot_tol, inf_tol=args.inf_tol)
    solutions = runtime.solve(tpl, instance, options)
    for line in _solution_records(solutions, tpl.variables, args.format):
        print(line)
    valid = sum(s.valid for s in solutions)
    print(f"valid solutions: {valid}", file=sys.stderr)
    return 0


def cmd_inspect(args) -> int:
    try:
        tpl = template_io.load(args.template)
    except (OSError, TemplateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(tpl.describe())
    return 0


def cmd_bench(args) -> int:
    config = Config(epsilon=args.eps, rank_tol=args.rank_tol,
                    residual_tol=args.residual_tol, pivot_tol=args.pivot_tol,
                    inf_tol=args.inf_tol, seed=args.seed,
                    max_subset_size=args.max_subset_size, forced_hidden=args.hidden)
    try:
        if args.target in ("SYS-A", "SYS-B", "SYS-C"):
            system, _, _ = problems.builtin(args.target)
        else:
            system = parse_system(Path(args.target).read_text())
        t0 = time.perf_counter()
        tpl = select_best(system, config)
        gen_seconds = time.perf_counter() - t0
    except (OSError, ProblemSyntaxError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    modes = [args.mode]
    if args.compare:
        modes = ["random", "near_degenerate"]
    args.outdir.mkdir(parents=True, exist_ok=True)
    summary = [f"target: {args.target}",
               f"basis={len(tpl.basis)} gep={tpl.pencil_size} "
               f"reduced={tpl.reduced_size} hidden={tpl.hidden_name}",
               f"generation time: {gen_seconds:.3f} s"]
    for mode in modes:
        report = problems.run_stability(tpl, trials=args.trials, mode=mode,
                                        seed=args.seed, gap=args.gap, config=config)
        stem = args.outdir / f"{mode}"
        (stem.with_suffix(".csv")).write_text("\n".join(report.csv_rows()) + "\n")
        (stem.with_suffix(".hist")).write_text(report.histogram_text() + "\n")
        summary.append("")
        summary.append(report.summary_text())
    text = "\n".join(summary) + "\n"
    (args.outdir / "summary.txt").write_text(text)
    print(text, end="")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"generate": cmd_generate, "solve": cmd_solve,
               "inspect": cmd_inspect, "bench": cmd_bench}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
