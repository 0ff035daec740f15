import math

import mpmath
import numpy as np
import pytest

from expleja.phi_kernel import (
    LejaSequence,
    candidate_grid,
    divided_differences,
    generate_leja,
    phi_divided_differences,
    phi_scalar,
)


def phi_mp(l, z, dps=250):
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        if z == 0:
            return mpmath.mpf(1) / mpmath.factorial(l)
        head = sum(z**k / mpmath.factorial(k) for k in range(l))
        return (mpmath.exp(z) - head) / z**l


def dd_mp(l, c, gamma, nodes, dps):
    """Textbook divided-difference recurrence carried out in high precision."""
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(c) + mpmath.mpf(gamma) * mpmath.mpf(x) for x in nodes]
        col = [phi_mp(l, x, dps) for x in xs]
        out = [col[0]]
        for j in range(1, len(xs)):
            col = [(col[i + 1] - col[i]) / (xs[i + j] - xs[i]) for i in range(len(col) - 1)]
            out.append(col[0])
        # coefficients in the [-2, 2] variable carry gamma^j
        return [float(d * mpmath.mpf(gamma) ** j) for j, d in enumerate(out)]


@pytest.mark.parametrize("l", range(0, 9))
@pytest.mark.parametrize("z", [-40.0, -7.3, -2.0, -1.999, -0.5, -1e-9, 0.0, 1e-7, 0.3, 1.5, 2.0, 5.0])
def test_phi_scalar_matches_extended_precision(l, z):
    exact = float(phi_mp(l, z))
    assert phi_scalar(l, z) == pytest.approx(exact, rel=5e-14, abs=0.0)


def test_phi_at_zero_is_inverse_factorial():
    for l in range(9):
        assert phi_scalar(l, 0.0) == 1.0 / math.factorial(l)


def test_phi_recursion_identity():
    for l in range(8):
        for z in (-3.0, -0.25, 0.7):
            lhs = phi_scalar(l, z)
            rhs = z * phi_scalar(l + 1, z) + 1.0 / math.factorial(l)
            assert lhs == pytest.approx(rhs, rel=1e-13)


def test_phi_order_out_of_range():
    with pytest.raises(ValueError):
        phi_scalar(9, 0.1)
    with pytest.raises(ValueError):
        phi_scalar(-1, 0.1)


def test_candidate_grid_keeps_endpoints_and_midpoint():
    g = candidate_grid(10_000)
    assert g[0] == -2.0 and g[-1] == 2.0 and g[5000] == 0.0
    assert len(g) == 10_001


def test_leja_sequence_starts_right_left_centre():
    seq = generate_leja(8)
    assert tuple(seq.nodes[:3]) == (2.0, -2.0, 0.0)
    assert seq.count == 8


def test_leja_nodes_are_distinct_and_in_interval():
    nodes = generate_leja(512).nodes
    assert len(np.unique(nodes)) == 512
    assert nodes.min() >= -2.0 and nodes.max() <= 2.0


def test_leja_greedy_property_brute_force():
    grid = candidate_grid(10_000)
    nodes = generate_leja(12).nodes
    for j in range(1, 12):
        prod = np.prod([np.abs(grid - x) for x in nodes[:j]], axis=0)
        assert np.prod(np.abs(nodes[j] - nodes[:j])) == pytest.approx(prod.max(), rel=1e-12)


def test_leja_prefix_is_stable():
    a = generate_leja(40).nodes
    b = generate_leja(100).nodes
    np.testing.assert_array_equal(a, b[:40])


def test_leja_sequence_is_read_only():
    seq = generate_leja(5)
    with pytest.raises(ValueError):
        seq.nodes[0] = 1.0
    assert seq.prefix(2) == (2.0, -2.0)
    assert isinstance(seq, LejaSequence)


@pytest.mark.parametrize("count,res", [(0, 10_000), (20_001, 20_000), (10, 5000)])
def test_generate_leja_rejects_bad_arguments(count, res):
    with pytest.raises(ValueError):
        generate_leja(count, res)


@pytest.mark.parametrize("l", [0, 1, 3])
@pytest.mark.parametrize("c,gamma", [(-0.5, 0.25), (-10.0, 5.0)])
def test_divided_differences_small_interval(l, c, gamma):
    nodes = generate_leja(24).nodes
    got = divided_differences(l, c, gamma, nodes).coefficients
    want = np.array(dd_mp(l, c, gamma, nodes, dps=80))
    assert np.max(np.abs(got - want)) <= 1e-14 * np.max(np.abs(want))


def test_divided_differences_wide_interval():
    # the double-precision recurrence has no correct digits here
    nodes = generate_leja(80).nodes
    c, gamma = -250.0, 125.0
    got = divided_differences(2, c, gamma, nodes).coefficients
    want = np.array(dd_mp(2, c, gamma, nodes, dps=250))
    assert np.max(np.abs(got - want)) <= 1e-13 * np.max(np.abs(want))


def test_newton_form_interpolates_at_nodes():
    nodes = generate_leja(30).nodes
    c, gamma = -6.0, 3.0
    table = divided_differences(1, c, gamma, nodes)
    values = table.newton_eval(nodes, nodes)
    exact = [phi_scalar(1, c + gamma * x) for x in nodes]
    np.testing.assert_allclose(values, exact, rtol=1e-12)


def test_all_orders_from_one_table_agree_with_single_order():
    nodes = tuple(generate_leja(40).nodes)
    table = phi_divided_differences(4, -3.0, 1.5, nodes)
    for l in range(5):
        single = divided_differences(l, -3.0, 1.5, nodes).coefficients
        assert np.max(np.abs(table[l] - single)) <= 1e-14 * np.max(np.abs(single))


def test_divided_differences_validation():
    nodes = generate_leja(10).nodes
    with pytest.raises(ValueError):
        divided_differences(1, -1.0, 0.0, nodes)
    with pytest.raises(ValueError):
        divided_differences(9, -1.0, 1.0, nodes)
    with pytest.raises(ValueError):
        phi_divided_differences(1, -1.0, 1.0, tuple(range(513)))


def test_divided_differences_overflow_is_reported():
    nodes = tuple(generate_leja(10).nodes)
    with pytest.raises(OverflowError):
        phi_divided_differences(1, 800.0, 1.0, nodes)
