# tests/test_stability.py
import math

import numpy as np
import pytest

from src.blocks.kinetics import basic_reproduction_number, reduced_rhs
from src.blocks.stability import (
    growth_rate,
    linearize,
    perturbation_solution,
    verify_against_ode,
)
from src.core.errors import DegeneracyError, DomainError, ParameterError
from src.models.internal import ReducedState
from src.models.output import StabilityClass


def _rhs3(point, params, deg, exc):
    u, qS, v = point
    d = reduced_rhs(ReducedState(u=u, qS=qS, v=v), params, deg, exc)
    return np.array([d.u, d.qS, d.v])


def _slope(point, j, params, deg, exc, h=1e-6):
    """Central difference of (du, dqS, dv) along variable j."""
    step = np.zeros(3)
    step[j] = h
    plus = _rhs3(np.asarray(point) + step, params, deg, exc)
    minus = _rhs3(np.asarray(point) - step, params, deg, exc)
    return (plus - minus) / (2 * h)


def test_growth_rate_reference_point(table_one, poisson25, poisson25_excess):
    """a at xi = 0.8 under the reference parameters and Poisson(25)."""
    xi = 0.8
    expected = 0.6 * 0.15 * xi * 25.0 * math.exp(25.0 * (xi - 1.0)) - 0.1
    assert growth_rate(xi, table_one, poisson25_excess) == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(-0.0879, abs=1e-4)


def test_jacobian_and_hessian_match_finite_differences(table_one, poisson25, poisson25_excess):
    rng = np.random.default_rng(11)
    for xi in rng.uniform(0.2, 1.0, size=5):
        report = linearize(float(xi), table_one, poisson25, poisson25_excess)
        point = (xi, 0.0, 0.0)
        numeric = np.column_stack([_slope(point, j, table_one, poisson25, poisson25_excess) for j in range(3)])
        np.testing.assert_allclose(numeric, report.J, rtol=1e-5, atol=1e-9)

        # du/dt is linear in qS and in v and vanishes at (u, 0, 0), so the mixed
        # derivative is the u-slope of those coefficients
        h = 1e-5 * xi

        def coefficient(u, j):
            point = np.array([u, 0.0, 0.0])
            point[j] = 1e-3
            return _rhs3(point, table_one, poisson25, poisson25_excess)[0] / 1e-3

        A = (coefficient(xi + h, 1) - coefficient(xi - h, 1)) / (2 * h)
        B = (coefficient(xi + h, 2) - coefficient(xi - h, 2)) / (2 * h)
        assert A == pytest.approx(report.A, rel=1e-4)
        assert B == pytest.approx(report.B, rel=1e-4)


def test_reference_constants_at_stable_point(table_one, poisson25, poisson25_excess):
    report = linearize(0.8, table_one, poisson25, poisson25_excess)
    assert report.classification == StabilityClass.STABLE
    assert report.a == pytest.approx(-0.0879, abs=1e-4)
    assert report.d3 == pytest.approx(-0.0899, abs=1e-3)
    assert report.d4 == pytest.approx(0.5603, abs=1e-3)
    assert report.M == pytest.approx(report.a)
    assert report.m == pytest.approx(-0.1)
    assert report.U == pytest.approx((abs(report.d3) + abs(report.d4)) / 0.1)
    assert report.L == -report.U
    assert report.J[2, 2] == report.a


def test_unstable_point(table_one, poisson25, poisson25_excess):
    report = linearize(0.95, table_one, poisson25, poisson25_excess)
    assert report.classification == StabilityClass.UNSTABLE
    assert report.a == pytest.approx(0.512, abs=1e-3)


def test_linearize_domain(table_one, poisson25, poisson25_excess):
    for xi in (0.0, -0.1, 1.2):
        with pytest.raises(DomainError):
            linearize(xi, table_one, poisson25, poisson25_excess)


def test_degenerate_h_coefficient(table_one, poisson25, poisson25_excess):
    """a + gamma1 = 0 leaves h undefined."""
    xi = 0.8
    a = linearize(xi, table_one, poisson25, poisson25_excess).a
    with pytest.raises(DegeneracyError):
        linearize(xi, table_one.replace(gamma1=-a), poisson25, poisson25_excess)


def test_perturbation_initial_values(table_one, poisson25, poisson25_excess):
    eps = 1e-4
    solution = perturbation_solution(linearize(0.8, table_one, poisson25, poisson25_excess), eps)
    y1, y2, y3 = solution.sample(np.array([0.0]))[0]
    assert y1 == pytest.approx(eps, rel=1e-12)
    assert y2 == pytest.approx(eps, rel=1e-12)
    assert y3 == pytest.approx(eps, rel=1e-12)


def test_perturbation_sample_matches_pointwise(table_one, poisson25, poisson25_excess):
    solution = perturbation_solution(linearize(0.8, table_one, poisson25, poisson25_excess), 1e-4)
    times = np.array([0.0, 1.0, 5.0, 20.0])
    rows = solution.sample(times)
    for t, row in zip(times, rows):
        assert row[0] == pytest.approx(solution.y1(t), rel=1e-8)
        assert row[2] == pytest.approx(solution.y3(t), rel=1e-12)
    with pytest.raises(ParameterError):
        solution.sample(np.array([2.0, 1.0]))


def test_limit_value_inside_interval(table_one, poisson25, poisson25_excess):
    eps = 1e-4
    solution = perturbation_solution(linearize(0.8, table_one, poisson25, poisson25_excess), eps)
    lower, upper = solution.limit_interval
    limit = solution.limit_value()
    assert lower < limit < upper
    assert limit / eps == pytest.approx(5.58, abs=0.05)


def test_perturbation_epsilon_range(table_one, poisson25, poisson25_excess):
    report = linearize(0.8, table_one, poisson25, poisson25_excess)
    with pytest.raises(ParameterError):
        perturbation_solution(report, 0.05)
    with pytest.raises(DegeneracyError):
        perturbation_solution(linearize(0.95, table_one, poisson25, poisson25_excess), 1e-4).limit_value()


def test_stable_equilibrium_settles_inside_bounds(table_one, poisson25, poisson25_excess):
    eps = 1e-4
    report = linearize(0.8, table_one, poisson25, poisson25_excess)
    check = verify_against_ode(report, eps, 200.0, poisson25, poisson25_excess)
    assert check.in_interval
    assert check.decayed
    assert check.v_final < 1e-6 and check.qS_final < 1e-6
    assert check.escape_time is None

    predicted = perturbation_solution(report, eps).limit_value()
    assert check.displacement == pytest.approx(predicted, rel=0.05)


def test_unstable_equilibrium_escapes(table_one, poisson25, poisson25_excess):
    report = linearize(0.95, table_one, poisson25, poisson25_excess)
    check = verify_against_ode(report, 1e-4, 20.0, poisson25, poisson25_excess)
    assert check.escape_time is not None
    assert check.escape_time < 10.0
    assert not check.in_interval


def test_growth_rate_at_one_follows_threshold(table_one, poisson25_excess):
    for beta in (0.001, 0.003, 0.01, 0.15):
        params = table_one.replace(beta=beta)
        a = growth_rate(1.0, params, poisson25_excess)
        r0 = basic_reproduction_number(params, poisson25_excess)
        assert np.sign(a) == np.sign(r0 - 1), beta


def test_limit_bounds_straddle_zero(table_one, poisson25, poisson25_excess):
    for xi in np.linspace(0.2, 1.0, 17):
        report = linearize(float(xi), table_one, poisson25, poisson25_excess)
        assert report.L < 0 < report.U, xi


def test_no_tracing_drops_tracing_entries(table_one, poisson25, poisson25_excess):
    report = linearize(0.8, table_one.replace(eta=0.0), poisson25, poisson25_excess)
    assert report.B == -table_one.beta
    assert report.J[1, 2] == 0.0


def test_no_release_drops_release_entries(table_one, poisson25, poisson25_excess):
    report = linearize(0.8, table_one.replace(gamma1=0.0), poisson25, poisson25_excess)
    assert report.A == 0.0
    assert report.J[0, 1] == 0.0
