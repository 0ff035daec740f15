"""One-step integrators: Rosenbrock-Euler, EXPRB43 (embedded and Richardson), RKF45.

Exponential steps linearise about the current state u, estimate the spectral
interval of J(u) once per attempt, and evaluate every phi action through
:func:`expleja.leja.apply_phi`. ``StepResult.matvecs`` is the number of
Jacobian applications the attempt consumed, power-iteration probes included.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence
from .leja import OperatorHandle, apply_phi, bounds_or_zero
from .phi_kernel import DEFAULT_RESOLUTION, MAX_NODES

NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class LejaSettings:
    max_iter: int = MAX_NODES
    tol_multiplier: float = 1.0
    power_iterations: int = 20
    power_safety: float = 1.25
    resolution: int = DEFAULT_RESOLUTION


@dataclass
class StepResult:
    u_high: np.ndarray
    u_low: np.ndarray
    error_estimate: float
    matvecs: int
    converged: bool = True
    leja_iterations: list = field(default_factory=list)


@dataclass(frozen=True)
class IntegratorDescriptor:
    name: str
    error_order: int

    def step(self, problem, u, dt, tol, leja=None):
        leja = leja or LejaSettings()
        if self.name == "rkf45":
            return rkf45_step(problem, u, dt)
        return _STEPPERS[self.name](problem, u, dt, tol, leja)


def relative_difference(u_high, u_low):
    return float(np.linalg.norm(u_high - u_low) / max(np.linalg.norm(u_high), NORM_FLOOR))


class _Linearisation:
    """J(u) as a counted operator plus its spectral interval and phi actions."""

    def __init__(self, problem, u, tol, leja, bounds=None):
        self.problem = problem
        self.u = u
        self.tol = tol * leja.tol_multiplier
        self.leja = leja
        self.op = OperatorHandle(problem.size, lambda v: problem.jacobian_apply(u, v))
        self.bounds = bounds or bounds_or_zero(self.op, leja.power_iterations, leja.power_safety)
        self.iterations = []

    def phi(self, l, v, dt):
        try:
            res = apply_phi(
                self.op, l, v, dt, self.tol, self.bounds,
                max_iter=self.leja.max_iter, resolution=self.leja.resolution,
            )
        except NonConvergence as exc:
            self.iterations.append(exc.iterations)
            raise
        self.iterations.append(res.iterations)
        return res.vector

    def remainder(self, w):
        return self.problem.remainder(self.u, w)


def _failed(u, lin):
    return StepResult(
        u_high=u, u_low=u, error_estimate=float("inf"),
        matvecs=lin.op.matvec_counter, converged=False, leja_iterations=list(lin.iterations),
    )


def rosenbrock_euler_step(problem, u, dt, tol, leja=None):
    """u + dt*phi_1(J dt) f(u); second order, no error estimate."""
    leja = leja or LejaSettings()
    lin = _Linearisation(problem, u, tol, leja)
    try:
        u_new = u + dt * lin.phi(1, problem.rhs(u), dt)
    except NonConvergence:
        return _failed(u, lin)
    return StepResult(u_new, u_new, 0.0, lin.op.matvec_counter, True, list(lin.iterations))


def _exprb43_stages(problem, u, dt, lin, fourth_order=True):
    f_u = problem.rhs(u)
    r_u = lin.remainder(u)
    a = u + 0.5 * dt * lin.phi(1, f_u, 0.5 * dt)
    v1 = dt * lin.phi(1, f_u, dt)
    r_a = lin.remainder(a)
    b = u + v1 + dt * lin.phi(1, r_a - r_u, dt)
    r_b = lin.remainder(b)
    u3 = u + v1 + dt * lin.phi(3, -14.0 * r_u + 16.0 * r_a - 2.0 * r_b, dt)
    if not fourth_order:
        return u3, None
    u4 = u3 + dt * lin.phi(4, 36.0 * r_u - 48.0 * r_a + 12.0 * r_b, dt)
    return u3, u4


def exprb43_step(problem, u, dt, tol, leja=None):
    """Embedded EXPRB43: fourth-order solution, third-order error estimate."""
    leja = leja or LejaSettings()
    lin = _Linearisation(problem, u, tol, leja)
    try:
        u3, u4 = _exprb43_stages(problem, u, dt, lin)
    except NonConvergence:
        return _failed(u, lin)
    return StepResult(
        u_high=u4, u_low=u3, error_estimate=relative_difference(u4, u3),
        matvecs=lin.op.matvec_counter, leja_iterations=list(lin.iterations),
    )


def exprb43_richardson_step(problem, u, dt, tol, leja=None):
    """Third-order EXPRB43 solution with a Richardson error estimate.

    One step of size dt is compared against two steps of dt/2; the two
    half steps are propagated. The first half step reuses the spectral
    interval of the full step since both linearise about u.
    """
    leja = leja or LejaSettings()
    lins = []

    def linearise(state, bounds=None):
        lins.append(_Linearisation(problem, state, tol, leja, bounds))
        return lins[-1]

    converged = True
    try:
        full = linearise(u)
        u_low, _ = _exprb43_stages(problem, u, dt, full, fourth_order=False)
        u_half, _ = _exprb43_stages(problem, u, 0.5 * dt, linearise(u, full.bounds), fourth_order=False)
        u_high, _ = _exprb43_stages(problem, u_half, 0.5 * dt, linearise(u_half), fourth_order=False)
    except NonConvergence:
        converged = False
    matvecs = sum(lin.op.matvec_counter for lin in lins)
    iterations = [it for lin in lins for it in lin.iterations]
    if not converged:
        return StepResult(u, u, float("inf"), matvecs, False, iterations)
    err = relative_difference(u_high, u_low) / (2**3 - 1)
    return StepResult(u_high, u_low, err, matvecs, True, iterations)


# Fehlberg 4(5) tableau
_RKF_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)


def rkf45_step(problem, u, dt, tol=None, leja=None):
    """Runge-Kutta-Fehlberg 4(5); each right-hand side counts as one matvec."""
    k = []
    for a_row in _RKF_A:
        stage = u.copy()
        for a_ij, k_j in zip(a_row, k):
            stage += dt * a_ij * k_j
        k.append(problem.rhs(stage))
    u5 = u + dt * sum(b * kk for b, kk in zip(_RKF_B5, k) if b)
    u4 = u + dt * sum(b * kk for b, kk in zip(_RKF_B4, k) if b)
    return StepResult(u5, u4, relative_difference(u5, u4), len(k), True, [])


_STEPPERS = {
    "rosenbrock_euler": rosenbrock_euler_step,
    "exprb43": exprb43_step,
    "exprb43_richardson": exprb43_richardson_step,
}

INTEGRATORS = {
    "rosenbrock_euler": IntegratorDescriptor("rosenbrock_euler", 1),
    "exprb43": IntegratorDescriptor("exprb43", 3),
    "exprb43_richardson": IntegratorDescriptor("exprb43_richardson", 3),
    "rkf45": IntegratorDescriptor("rkf45", 4),
}


def get_integrator(name):
    try:
        return INTEGRATORS[name]
    except KeyError:
        raise ValueError(f"unknown integrator {name!r}; choose from {sorted(INTEGRATORS)}") from None
