import math

import numpy as np
import pytest
from scipy.linalg import expm

from expleja.errors import NonConvergence
from expleja.integrators import (
    INTEGRATORS,
    LejaSettings,
    exprb43_richardson_step,
    exprb43_step,
    get_integrator,
    relative_difference,
    rkf45_step,
    rosenbrock_euler_step,
)
from expleja.problems import LinearProblem, PDEProblem, zero_problem

EXPONENTIAL = [rosenbrock_euler_step, exprb43_step, exprb43_richardson_step]


def linear_fixture(n=16, seed=0):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q * -rng.uniform(0.0, 60.0, n)) @ q.T
    return LinearProblem(a, rng.standard_normal(n))


class CountingProblem:
    """Wraps a problem and counts Jacobian applications independently."""

    def __init__(self, inner):
        self.inner = inner
        self.size = inner.size
        self.jacobian_calls = 0

    def rhs(self, u):
        return self.inner.rhs(u)

    def jacobian_apply(self, u, v):
        self.jacobian_calls += 1
        return self.inner.jacobian_apply(u, v)

    def remainder(self, u, w):
        return self.inner.rhs(w) - self.inner.jacobian_apply(u, w)


def test_descriptor_orders():
    assert {k: d.error_order for k, d in INTEGRATORS.items()} == {
        "rosenbrock_euler": 1, "exprb43": 3, "exprb43_richardson": 3, "rkf45": 4,
    }
    with pytest.raises(ValueError):
        get_integrator("rk4")


def test_relative_difference_floor():
    assert relative_difference(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_difference(np.array([2.0, 0.0]), np.array([1.0, 0.0])) == 0.5


@pytest.mark.parametrize("step", EXPONENTIAL + [rkf45_step])
def test_zero_right_hand_side_leaves_state_unchanged(step):
    p = zero_problem(6)
    u = p.initial_condition()
    res = step(p, u, 0.3, 1e-8)
    np.testing.assert_array_equal(res.u_high, u)
    assert res.error_estimate == 0.0 and res.converged


def test_constant_state_of_inviscid_burgers_is_steady():
    p = PDEProblem("inviscid_burgers_1d", 32, 10.0)
    u = np.full(32, 2.0)
    res = exprb43_step(p, u, 1e-3, 1e-8)
    np.testing.assert_allclose(res.u_high, u, rtol=1e-14)


@pytest.mark.parametrize("step", EXPONENTIAL)
def test_linear_problems_are_integrated_exactly(step):
    p = linear_fixture()
    u = p.initial_condition()
    tol = 1e-10
    res = step(p, u, 0.1, tol)
    exact = expm(0.1 * p.matrix) @ u
    assert np.linalg.norm(res.u_high - exact) <= 20 * tol * np.linalg.norm(u)
    assert res.error_estimate <= 20 * tol


@pytest.mark.parametrize("step", [rosenbrock_euler_step, exprb43_step])
def test_matvec_accounting_matches_operator_calls(step):
    p = CountingProblem(PDEProblem("viscous_burgers_1d", 64, 10.0))
    u = p.inner.initial_condition()
    res = step(p, u, 2e-4, 1e-8)
    assert res.matvecs == p.jacobian_calls
    assert res.matvecs == 20 + sum(res.leja_iterations)


def test_richardson_accounting_and_scaling():
    inner = PDEProblem("viscous_burgers_1d", 64, 10.0)
    p = CountingProblem(inner)
    u = inner.initial_condition()
    res = exprb43_richardson_step(p, u, 2e-4, 1e-8)
    assert res.matvecs == p.jacobian_calls
    # two spectral estimates: the second half step linearises about a new state
    assert res.matvecs == 40 + sum(res.leja_iterations)
    assert res.error_estimate == pytest.approx(relative_difference(res.u_high, res.u_low) / 7)


def test_exprb43_pair_difference_is_the_estimate():
    p = PDEProblem("viscous_burgers_1d", 64, 10.0)
    u = p.initial_condition()
    res = exprb43_step(p, u, 1e-4, 1e-10)
    assert res.error_estimate == relative_difference(res.u_high, res.u_low)
    assert 0.0 < res.error_estimate < 1e-3


def test_exprb43_stages_by_hand():
    p = PDEProblem("porous_medium_1d", 32, 10.0)
    u = p.initial_condition()
    dt = 2e-5
    jac = np.column_stack([p.jacobian_apply(u, e) for e in np.eye(32)])

    def phi(l, m):
        n = m.shape[0]
        aug = np.zeros((n * (l + 1), n * (l + 1)))
        aug[:n, :n] = m
        for k in range(l):
            aug[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = np.eye(n)
        return expm(aug)[:n, l * n:(l + 1) * n]

    f = p.rhs(u)
    F = lambda w: p.rhs(w) - jac @ w
    a = u + dt / 2 * phi(1, jac * dt / 2) @ f
    v1 = dt * phi(1, jac * dt) @ f
    b = u + v1 + dt * phi(1, jac * dt) @ (F(a) - F(u))
    u3 = u + v1 + dt * phi(3, jac * dt) @ (-14 * F(u) + 16 * F(a) - 2 * F(b))
    u4 = u3 + dt * phi(4, jac * dt) @ (36 * F(u) - 48 * F(a) + 12 * F(b))
    res = exprb43_step(p, u, dt, 1e-12)
    scale = np.linalg.norm(u)
    assert np.linalg.norm(res.u_low - u3) <= 1e-10 * scale
    assert np.linalg.norm(res.u_high - u4) <= 1e-10 * scale


def test_leja_failure_marks_step_unconverged():
    p = PDEProblem("viscous_burgers_1d", 128, 10.0)
    u = p.initial_condition()
    res = exprb43_step(p, u, 1e-2, 1e-10, LejaSettings(max_iter=10))
    assert not res.converged
    assert res.error_estimate == math.inf
    np.testing.assert_array_equal(res.u_high, u)
    assert res.matvecs == 20 + sum(res.leja_iterations)


def test_rkf45_scalar_growth():
    p = LinearProblem(np.array([[1.0]]), [1.0])
    res = rkf45_step(p, np.array([1.0]), 0.1)
    assert res.u_high[0] == pytest.approx(math.exp(0.1), rel=1e-8)
    assert res.matvecs == 6


def test_rkf45_error_estimate_shrinks_with_dt():
    p = PDEProblem("viscous_burgers_1d", 32, 10.0)
    u = p.initial_condition()
    e1 = rkf45_step(p, u, 2e-4).error_estimate
    e2 = rkf45_step(p, u, 1e-4).error_estimate
    assert e2 < e1 / 16


def test_nonconvergence_is_an_arithmetic_error():
    err = NonConvergence("x", iterations=3)
    assert isinstance(err, ArithmeticError) and err.iterations == 3
