"""``vi`` command: ``solve``, ``compare`` and ``figures``.

Exit status is 0 when a run ends with ResidualMet or FixedPoint, 2 when it
hits the iteration cap and 1 on any error.
"""

import argparse
import logging
import sys

from .errors import ViError
from .harness import (compare_runs, load_compare_spec, load_run_spec, problem_from_dict,
                      run_experiment, run_figures, run_spec_from_dict, _parse_toml)
from .solvers import ALGORITHMS, FIXED_POINT, MAX_ITERS, RESIDUAL_MET

# flag name -> RunSpec field
SOLVE_FLAGS = {
    "algorithm": "algorithm", "variant": "variant", "normal_u": "normal_u",
    "normal_v": "normal_v", "beta": "beta", "sigma": "sigma", "delta": "delta",
    "theta": "theta", "cap_M": "cap_M", "tol": "tol", "max_iters": "max_iters",
    "x0": "x0", "out": "trajectory", "report": "report",
}


def _exit_code(termination):
    if termination in (RESIDUAL_MET, FIXED_POINT):
        return 0
    if termination == MAX_ITERS:
        return 2
    return 1


def build_parser():
    p = argparse.ArgumentParser(prog="vi", description="Conditional extragradient solvers")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one solver")
    s.add_argument("--spec", help="TOML run spec; flags override its values")
    s.add_argument("--problem", help="registry name or a TOML file holding a [problem] table")
    s.add_argument("--algorithm", choices=ALGORITHMS)
    s.add_argument("--variant", type=int, choices=(1, 2, 3))
    s.add_argument("--normal-u", dest="normal_u", metavar="{zero|unit|scaled:<m>}")
    s.add_argument("--normal-v", dest="normal_v", metavar="{zero|unit|scaled:<m>}")
    s.add_argument("--beta", type=float)
    s.add_argument("--sigma", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--cap-M", dest="cap_M", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--x0", help="comma separated start point")
    s.add_argument("--project-start", action="store_true",
                   help="project an infeasible x0 onto C instead of rejecting it")
    s.add_argument("--out", help="trajectory CSV path")
    s.add_argument("--report", help="JSON report path")

    c = sub.add_parser("compare", help="run a comparison file")
    c.add_argument("--spec", required=True)
    c.add_argument("--out-dir", default=None)
    c.add_argument("--workers", type=int, default=1)

    f = sub.add_parser("figures", help="reproduce the figure experiments")
    f.add_argument("--out-dir", default="figures")
    f.add_argument("--max-iters", dest="max_iters", type=int, default=10_000,
                   help="iteration cap of the convergence runs")
    return p


def _problem_arg(value):
    if value.endswith(".toml"):
        with open(value) as fh:
            data = _parse_toml(fh.read(), value)
        table = data.get("problem", data)
        problem_from_dict(table)
        return table
    return value


def _solve(args):
    base = load_run_spec(args.spec).to_dict() if args.spec else {}
    for flag, name in SOLVE_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            base[name] = value
    if args.problem is not None:
        base["problem"] = _problem_arg(args.problem)
    if args.project_start:
        base["project_start"] = True
    spec = run_spec_from_dict(base, where="command line")
    report = run_experiment(spec)
    print(f"{spec.run_label}: {report.termination} after {report.iterations} iterations, "
          f"residual {report.final_residual:.3e}"
          + ("" if report.final_distance != report.final_distance
             else f", distance to solution {report.final_distance:.3e}"))
    print("x = " + ", ".join(f"{t:.10g}" for t in report.final_x))
    return _exit_code(report.termination)


def _compare(args):
    specs, table_path = load_compare_spec(args.spec)
    table = compare_runs(specs, table_path=table_path or "comparison.csv",
                         out_dir=args.out_dir, workers=args.workers)
    width = max(len(r.label) for r in table)
    for r in table:
        print(f"{r.label:<{width}}  {r.termination:<17} it={r.iterations:<6} "
              f"res={r.final_residual:.2e} dist={r.final_distance:.2e} t={r.wall_time:.3f}s")
    codes = {_exit_code(r.termination) for r in table}
    return 1 if 1 in codes else max(codes)


def _figures(args):
    rows = run_figures(args.out_dir, max_iters_full=args.max_iters)
    for r in rows:
        mark = "normals help" if r["normals_win"] else "normals do not help"
        print(f"figure {r['figure']}: {r['dist_without']:.6f} -> {r['dist_with']:.6f}  ({mark})")
    print(f"wrote trajectories and tables to {args.out_dir}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": _solve, "compare": _compare, "figures": _figures}[args.command]
    try:
        return handler(args)
    except (ViError, OSError) as exc:
        print(f"vi: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
