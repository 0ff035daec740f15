"""Step-size control: accuracy-based, cost-based, and the integration loop.

The cost-based controller descends ln(matvecs / dt) in ln(dt) using the
finite-difference slope between the last two accepted steps, and never
proposes more than the accuracy-based step allows.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import HistoryError, RejectionLimit, StagnationError
from .integrators import LejaSettings

TRADITIONAL = "traditional"
NONPENALIZED = "adaptive_nonpenalized"
PENALIZED = "adaptive_penalized"
VARIANTS = (TRADITIONAL, NONPENALIZED, PENALIZED)

ERR_FLOOR = 1e-16
SHRINK_LIMIT, GROWTH_LIMIT = 0.1, 5.0
BOOTSTRAP_FACTOR = 1.2
EQUAL_LOG_DT = 1e-12
MAX_REJECTIONS = 25
STAGNATION = 1e-14
# a step within this relative distance of t_end finishes the run (no roundoff slivers)
LANDING = 1e-10


@dataclass(frozen=True)
class ControllerParams:
    alpha_c: float = 0.0
    beta_c: float = 0.0
    lam: float = 1.0
    delta: float = 1.0
    safety: float = 0.9
    variant: str = TRADITIONAL

    @property
    def adaptive(self):
        return self.variant != TRADITIONAL

    @classmethod
    def for_variant(cls, variant, safety=0.9):
        if variant == TRADITIONAL:
            return cls(safety=safety, variant=variant)
        if variant == NONPENALIZED:
            return cls(0.65241444, 0.26862269, 1.37412002, 0.64446017, safety, variant)
        if variant == PENALIZED:
            return cls(1.19735982, 0.44611854, 1.38440318, 0.73715227, safety, variant)
        raise ValueError(f"unknown controller {variant!r}; choose from {VARIANTS}")


@dataclass
class ControllerState:
    dt_prev: float = 0.0
    cost_prev: float = 0.0
    err_prev: float = 0.0
    have_history: bool = False


@dataclass(frozen=True)
class StepDecision:
    dt_next: float
    limited_by: str


@dataclass
class StepRecord:
    step: int
    t: float
    dt: float
    matvecs: int
    error_estimate: float
    accepted: bool
    limited_by: str = ""
    leja_iterations: tuple = ()


@dataclass
class RunLog:
    records: list = field(default_factory=list)
    u_final: np.ndarray = None
    t_end: float = 0.0
    dt_cfl: float = 0.0
    tol: float = 0.0
    wall_time: float = 0.0
    final_error: float = None
    config: object = None

    @property
    def matvecs(self):
        return sum(r.matvecs for r in self.records)

    @property
    def steps(self):
        return sum(1 for r in self.records if r.accepted)

    @property
    def rejections(self):
        return sum(1 for r in self.records if not r.accepted)

    def accepted_dts(self):
        return np.array([r.dt for r in self.records if r.accepted])


def traditional_next_dt(dt, err, tol, p, safety=0.9):
    """safety * dt * (tol/err)^(1/(p+1)), clamped to [0.1 dt, 5 dt]."""
    err = max(err, ERR_FLOOR)
    factor = safety * (tol / err) ** (1.0 / (p + 1))
    return dt * min(max(factor, SHRINK_LIMIT), GROWTH_LIMIT)


def cost_factor(slope, params):
    """Step multiplier from the log-log cost slope."""
    s = math.exp(-params.alpha_c * math.tanh(params.beta_c * slope))
    if 1.0 <= s < params.lam:
        return params.lam
    if params.delta <= s < 1.0:
        return params.delta
    return s


def adaptive_next_dt(state, dt_n, cost_n, params, dt_traditional):
    if not state.have_history:
        raise HistoryError("cost-based control needs two accepted steps")
    dlog = math.log(dt_n) - math.log(state.dt_prev)
    if abs(dlog) < EQUAL_LOG_DT:
        slope = 0.0
    else:
        slope = (math.log(cost_n) - math.log(state.cost_prev)) / dlog
    proposed = dt_n * cost_factor(slope, params)
    if proposed < dt_traditional:
        return StepDecision(proposed, "cost")
    return StepDecision(dt_traditional, "accuracy")


def _bootstrap_dt(dt_1, dt_trad):
    """Second step of an adaptive run: the traditional proposal, pushed at
    least a factor 1.2 away from dt_1 so the first cost slope is defined."""
    if abs(math.log(dt_trad / dt_1)) >= math.log(BOOTSTRAP_FACTOR):
        return StepDecision(dt_trad, "accuracy")
    return StepDecision(dt_1 / BOOTSTRAP_FACTOR, "cost")


def integrate(problem, descriptor, params, tol, dt0=None, dt_max=None, leja=None, u0=None):
    """Advance ``problem`` from t = 0 to its final time with step-size control.

    Returns
    -------
    RunLog
        Every attempt, accepted or rejected, with its matvec cost.

    Raises
    ------
    StagnationError
        If the step size falls below 1e-14 * t_end.
    RejectionLimit
        If one step is rejected 25 times in a row.
    """
    leja = leja or LejaSettings()
    t_end = problem.t_end
    dt_max = t_end if dt_max is None else float(dt_max)
    dt = min(problem.cfl_dt() if dt0 is None else float(dt0), dt_max)
    p = descriptor.error_order
    u = problem.initial_condition() if u0 is None else np.array(u0, dtype=float)
    log = RunLog(t_end=t_end, dt_cfl=problem.cfl_dt(), tol=tol)
    state = ControllerState()
    rejected_in_a_row = 0
    t = 0.0
    started = time.perf_counter()
    while t < t_end:
        if dt < STAGNATION * t_end:
            raise StagnationError(f"step size {dt:.3e} stagnated at t = {t:.6g}")
        remaining = t_end - t
        last = dt >= remaining * (1.0 - LANDING)
        dt_try = remaining if last else dt
        res = descriptor.step(problem, u, dt_try, tol, leja)
        index = len(log.records)
        if not res.converged or not res.error_estimate <= tol:
            if not res.converged:
                err_ref = state.err_prev if state.have_history else tol
                dt = min(traditional_next_dt(dt_try, err_ref, tol, p, params.safety), 0.5 * dt_try)
                why = "leja"
            else:
                dt = traditional_next_dt(dt_try, res.error_estimate, tol, p, params.safety)
                why = "error"
            log.records.append(
                StepRecord(index, t, dt_try, res.matvecs, res.error_estimate, False, why,
                           tuple(res.leja_iterations))
            )
            rejected_in_a_row += 1
            if rejected_in_a_row >= MAX_REJECTIONS:
                raise RejectionLimit(f"step at t = {t:.6g} rejected {MAX_REJECTIONS} times")
            continue

        rejected_in_a_row = 0
        u = res.u_high
        if not np.all(np.isfinite(u)):
            raise StagnationError(f"non-finite state at t = {t:.6g}")
        t_start = t
        t = t_end if last else t + dt_try
        dt_trad = traditional_next_dt(dt_try, res.error_estimate, tol, p, params.safety)
        cost = max(res.matvecs, 1) / dt_try
        if not params.adaptive:
            decision = StepDecision(dt_trad, "accuracy")
        elif not state.have_history:
            decision = _bootstrap_dt(dt_try, dt_trad)
        else:
            decision = adaptive_next_dt(state, dt_try, cost, params, dt_trad)
        state = ControllerState(dt_try, cost, res.error_estimate, have_history=True)
        dt, limited_by = decision.dt_next, decision.limited_by
        if dt >= dt_max:
            dt, limited_by = dt_max, "ceiling"
        log.records.append(
            StepRecord(index, t_start, dt_try, res.matvecs, res.error_estimate, True, limited_by,
                       tuple(res.leja_iterations))
        )
    log.u_final = u
    log.wall_time = time.perf_counter() - started
    return log
