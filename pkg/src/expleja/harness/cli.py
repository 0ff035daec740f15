"""Command-line entry point: ``expleja`` or ``python -m expleja``.

Examples
--------
    expleja --problem viscous_burgers_1d --N 300 --eta 10 --tol 1e-4,1e-6 \\
        --controller traditional,adaptive_nonpenalized --out results
    expleja --sweep grid.ini --jobs 4 --out results --emit-plot-data

Every flag except ``--sweep``, ``--out`` and the output switches accepts a
comma-separated list; the runs are the Cartesian product. With ``--sweep``
the flags override the file's values in every section.
"""
from __future__ import annotations

import argparse
import sys

from ..controllers import VARIANTS
from .config import ESTIMATORS, RUN_INTEGRATORS, expand, read_sweep, tolerance_grid
from .runner import run_sweep, summary_csv, write_outputs

# flag -> config key for the options that describe runs
RUN_FLAGS = {
    "problem": "problem", "N": "N", "Nx": "Nx", "Ny": "Ny",
    "eta": "eta", "etax": "etax", "etay": "etay", "tol": "tol",
    "integrator": "integrator", "controller": "controller", "estimator": "estimator",
    "dt0": "dt0", "dt_max": "dt_max", "t_end": "t_end",
    "leja_max_iter": "leja_max_iter", "candidate_resolution": "candidate_resolution",
    "tol_multiplier": "tol_multiplier", "power_iterations": "power_iterations",
    "power_safety": "power_safety",
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="expleja",
        description="Run EXPRB43/Leja benchmarks and write work-precision CSV files.",
    )
    p.add_argument("--problem", help="problem kind, e.g. viscous_burgers_1d")
    p.add_argument("--N", help="grid points (1D, or both axes in 2D)")
    p.add_argument("--Nx", help="grid points along x (2D)")
    p.add_argument("--Ny", help="grid points along y (2D)")
    p.add_argument("--eta", help="Peclet number")
    p.add_argument("--etax", help="Peclet number along x (2D)")
    p.add_argument("--etay", help="Peclet number along y (2D)")
    p.add_argument("--tol", help="tolerance(s); default 1e-4..1e-8 in decades")
    p.add_argument("--half-decades", action="store_true",
                   help="refine the default tolerance grid to half decades")
    p.add_argument("--integrator", help=f"one of {', '.join(RUN_INTEGRATORS)}")
    p.add_argument("--controller", help=f"one of {', '.join(VARIANTS)}")
    p.add_argument("--estimator", help=f"one of {', '.join(ESTIMATORS)} (exprb43 only)")
    p.add_argument("--dt0", help="initial step; default is the CFL reference step")
    p.add_argument("--dt-max", dest="dt_max", help="step-size ceiling; default t_end")
    p.add_argument("--t-end", dest="t_end", help="final time; default depends on the problem")
    p.add_argument("--leja-max-iter", dest="leja_max_iter")
    p.add_argument("--candidate-resolution", dest="candidate_resolution")
    p.add_argument("--tol-multiplier", dest="tol_multiplier",
                   help="Leja tolerance as a multiple of the step tolerance")
    p.add_argument("--power-iterations", dest="power_iterations")
    p.add_argument("--power-safety", dest="power_safety")
    p.add_argument("--sweep", metavar="FILE", help="sweep file with one section per run family")
    p.add_argument("--out", metavar="DIR", help="output directory; summary goes to stdout if omitted")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the reference solution; final_error is left empty")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall_ms empty so reruns are byte-identical")
    p.add_argument("--no-traces", action="store_true", help="do not write per-run step traces")
    p.add_argument("--emit-plot-data", action="store_true",
                   help="also write tol-vs-matvecs tables per problem setup")
    return p


def configs_from_args(args):
    given = {key: getattr(args, flag) for flag, key in RUN_FLAGS.items()
             if getattr(args, flag) is not None}
    if args.sweep:
        return read_sweep(args.sweep, given)
    if "problem" not in given:
        raise ValueError("give --problem or --sweep")
    if "tol" not in given:
        given["tol"] = ",".join(repr(t) for t in tolerance_grid(args.half_decades))
    return expand(given)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        configs = configs_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"expleja: {exc}", file=sys.stderr)
        return 2
    outcomes = run_sweep(configs, reference=not args.no_reference, workers=max(args.jobs, 1))
    timing = not args.no_timing
    if args.out:
        write_outputs(outcomes, args.out, timing=timing, traces=not args.no_traces,
                      plot_data=args.emit_plot_data)
    else:
        sys.stdout.write(summary_csv(outcomes, timing))
    failed = [o for o in outcomes if o.status != "ok"]
    for o in failed:
        print(f"expleja: {o.config.problem} tol={o.config.tol:g} {o.config.controller}: "
              f"{o.status} {o.message}".rstrip(), file=sys.stderr)
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
