"""Single runs, reference solutions, sweeps and their CSV output.

Cost is counted in Jacobian matvecs, power-iteration probes and rejected
attempts included. RKF45 counts one right-hand-side evaluation as one
matvec. Wall time is recorded but never used for control.
"""
from __future__ import annotations

import csv
import io
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..controllers import TRADITIONAL, ControllerParams, integrate
from ..errors import RejectionLimit, StagnationError
from ..integrators import get_integrator

SUMMARY_HEADER = (
    "problem", "N", "Nx", "Ny", "eta", "etax", "etay", "integrator", "controller",
    "tol", "matvecs", "steps", "rejections", "final_error", "wall_ms", "status",
)
TRACE_HEADER = (
    "step", "t", "dt", "dt_over_cfl", "matvecs", "error_estimate", "accepted", "limited_by",
)
PLOT_HEADER = ("controller", "tol", "matvecs")

REFERENCE_TOL = 1e-11
REFERENCE_INTEGRATOR = "exprb43"
# global error may exceed the local tolerance by this factor
ACCURACY_FACTOR = 10.0

_reference_cache = {}
_reference_locks = {}
_registry_lock = threading.Lock()


def clear_reference_cache():
    with _registry_lock:
        _reference_cache.clear()
        _reference_locks.clear()


def compute_reference(problem, descriptor=None, tol=REFERENCE_TOL, leja=None):
    """Final state of a traditional-controller run at a tight tolerance.

    Results are cached by problem identity, integrator and tolerance; the
    first caller computes, concurrent callers for the same key wait for it.
    The returned array is read-only and shared between callers.
    """
    descriptor = descriptor or get_integrator(REFERENCE_INTEGRATOR)
    key = problem.cache_key()
    if key is None:
        return _integrate_reference(problem, descriptor, tol, leja)
    key = (key, descriptor.name, float(tol))
    with _registry_lock:
        if key in _reference_cache:
            return _reference_cache[key]
        lock = _reference_locks.setdefault(key, threading.Lock())
    with lock:
        if key not in _reference_cache:
            _reference_cache[key] = _integrate_reference(problem, descriptor, tol, leja)
        return _reference_cache[key]


def _integrate_reference(problem, descriptor, tol, leja):
    log = integrate(problem, descriptor, ControllerParams.for_variant(TRADITIONAL), tol, leja=leja)
    u = np.array(log.u_final, dtype=float)
    u.setflags(write=False)
    return u


def relative_error(u, reference):
    scale = np.linalg.norm(reference)
    diff = np.linalg.norm(np.asarray(u) - reference)
    return float(diff / scale) if scale > 0 else float(diff)


def run_single(config, reference=True):
    """Integrate one configuration.

    Returns
    -------
    RunLog
        With ``config`` attached and ``final_error`` set when ``reference`` is true.

    Raises
    ------
    StagnationError, RejectionLimit
        Passed through from the integration loop.
    """
    problem = config.build_problem()
    descriptor = get_integrator(config.descriptor_name)
    params = ControllerParams.for_variant(config.controller)
    leja = config.leja_settings()
    log = integrate(problem, descriptor, params, config.tol,
                    dt0=config.dt0, dt_max=config.dt_max, leja=leja)
    log.config = config
    if reference:
        ref = compute_reference(problem)
        log.final_error = relative_error(log.u_final, ref)
    return log


@dataclass
class RunOutcome:
    config: object
    log: object = None
    status: str = "ok"
    message: str = ""


def execute(config, reference=True):
    """run_single with failures turned into a status instead of an exception."""
    try:
        log = run_single(config, reference)
    except StagnationError as exc:
        return RunOutcome(config, None, "stagnation", str(exc))
    except RejectionLimit as exc:
        return RunOutcome(config, None, "rejection_limit", str(exc))
    except (ArithmeticError, ValueError) as exc:
        return RunOutcome(config, None, "error", f"{type(exc).__name__}: {exc}")
    status = "ok"
    if log.final_error is not None and not log.final_error <= ACCURACY_FACTOR * config.tol:
        status = "inaccurate"
    return RunOutcome(config, log, status)


def run_sweep(configs, reference=True, workers=1):
    """Execute every config and return outcomes sorted by
    (problem, N, eta, controller, tol). Duplicates keep their input order."""
    configs = list(configs)
    if not configs:
        raise ValueError("empty sweep")
    order = sorted(range(len(configs)), key=lambda i: (configs[i].sort_key(), i))
    ordered = [configs[i] for i in order]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: execute(c, reference), ordered))
    return [execute(c, reference) for c in ordered]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def summary_row(outcome, timing=True):
    cfg, log = outcome.config, outcome.log
    row = [cfg.problem, *cfg.grid_columns(), cfg.descriptor_name, cfg.controller, cfg.tol]
    if log is None:
        row += [None, None, None, None, None]
    else:
        row += [log.matvecs, log.steps, log.rejections, log.final_error,
                round(1e3 * log.wall_time, 3) if timing else None]
    row.append(outcome.status)
    return [_fmt(v) for v in row]


def trace_rows(log):
    for r in log.records:
        yield [_fmt(v) for v in (r.step, r.t, r.dt, r.dt / log.dt_cfl, r.matvecs,
                                 r.error_estimate, r.accepted, r.limited_by)]


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def summary_csv(outcomes, timing=True):
    return _csv_text(SUMMARY_HEADER, (summary_row(o, timing) for o in outcomes))


def trace_csv(log):
    return _csv_text(TRACE_HEADER, trace_rows(log))


def run_label(index, config):
    parts = [f"{index:04d}", config.problem]
    n, nx, ny, eta, ex, ey = config.grid_columns()
    parts += [f"N{n}", f"eta{eta:g}"] if n else [f"N{nx}x{ny}", f"eta{ex:g}x{ey:g}"]
    parts += [config.descriptor_name, config.controller, f"tol{config.tol:g}"]
    return "_".join(parts)


def plot_tables(outcomes):
    """Work-precision tables (x = tol, y = matvecs), one per problem setup and integrator."""
    groups = {}
    for o in outcomes:
        if o.log is None:
            continue
        cfg = o.config
        name = "_".join(
            [cfg.problem] + [_fmt(v) for v in cfg.grid_columns() if v is not None] + [cfg.descriptor_name]
        )
        groups.setdefault(name, []).append((cfg.controller, cfg.tol, o.log.matvecs))
    return {name: _csv_text(PLOT_HEADER, ([_fmt(v) for v in row] for row in sorted(rows)))
            for name, rows in sorted(groups.items())}


def write_outputs(outcomes, out_dir, timing=True, traces=True, plot_data=False):
    """Write summary.csv, per-run traces and optional plot tables under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        fh.write(summary_csv(outcomes, timing))
    if traces:
        trace_dir = os.path.join(out_dir, "traces")
        os.makedirs(trace_dir, exist_ok=True)
        for i, o in enumerate(outcomes):
            if o.log is not None:
                path = os.path.join(trace_dir, run_label(i, o.config) + ".csv")
                with open(path, "w", newline="") as fh:
                    fh.write(trace_csv(o.log))
    if plot_data:
        plot_dir = os.path.join(out_dir, "plot_data")
        os.makedirs(plot_dir, exist_ok=True)
        for name, text in plot_tables(outcomes).items():
            with open(os.path.join(plot_dir, name + ".csv"), "w", newline="") as fh:
                fh.write(text)
