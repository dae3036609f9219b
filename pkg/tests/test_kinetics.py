# tests/test_kinetics.py
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from src.blocks.dist import excess_of
from src.blocks.kinetics import (
    FullSystem,
    aggregate_full,
    basic_reproduction_number,
    compare_early_time,
    compare_reduced_full,
    conservation_error,
    early_time_model,
    early_time_v,
    expand_reduced,
    final_size,
    full_initial_state,
    full_rhs,
    parameter_sweep,
    ratio_series,
    reduced_initial_state,
    reduced_rhs,
    sample_grid,
    solve_full,
    solve_reduced,
)
from src.core.errors import DegeneracyError, ParameterError
from src.models.internal import COMPARTMENTS, EpidemicParams, FullState, ReducedState, Trajectory


def test_sample_grid_ends_exactly_at_t_end():
    np.testing.assert_allclose(sample_grid(1.0, 0.25), [0, 0.25, 0.5, 0.75, 1.0])
    grid = sample_grid(1.0, 0.3)
    assert grid[-1] == 1.0 and len(grid) == 5


def test_full_rhs_sums_to_zero_per_degree(table_one, poisson25, poisson25_excess):
    """The five derivatives cancel for every degree class."""
    rng = np.random.default_rng(3)
    raw = rng.random((5, poisson25.kmax + 1))
    raw /= raw.sum(axis=0)
    state = FullState.from_vector(raw.ravel())
    deriv = full_rhs(state, table_one, poisson25, poisson25_excess)
    np.testing.assert_allclose(deriv.compartment_sum(), 0.0, atol=1e-12)


def test_reduced_rhs_conserves_edge_weighted_total(table_one, poisson25, poisson25_excess):
    """g1(u) + qS + v + qI + r is constant along the reduced flow."""
    state = reduced_initial_state(poisson25_excess, 1e-3)
    deriv = reduced_rhs(state, table_one, poisson25, poisson25_excess)
    g1p = poisson25_excess.pgf(state.u, 1)
    assert deriv.qS + deriv.v + deriv.qI + deriv.r + g1p * deriv.u == pytest.approx(0.0, abs=1e-12)


def test_initial_states():
    full = full_initial_state(10, 0.01)
    np.testing.assert_allclose(full.compartment_sum(), 1.0)
    assert full.x[3] == 0.01
    with pytest.raises(ParameterError):
        full_initial_state(10, 0.0)


def test_reduced_initial_state_inverts_excess_pgf(poisson25_excess):
    state = reduced_initial_state(poisson25_excess, 1e-3)
    assert poisson25_excess.pgf(state.u) == pytest.approx(1 - 1e-3, abs=1e-12)
    assert state.v == 1e-3 and state.qS == 0.0


def test_conservation_table_one(table_one, poisson25_full):
    """Full system at kmax=1000: every degree class sums to 1 within 1e-6 over [0, 150]."""
    exc = excess_of(poisson25_full)
    traj = solve_full(table_one, poisson25_full, exc, t_end=150.0)
    assert conservation_error(traj) <= 1e-6
    assert traj.times[-1] == 150.0


def _classical_sir(params, deg, exc, epsilon, t_end, sample_dt):
    """Degree-based SIR without isolation, coded independently of the full system."""
    k = np.arange(deg.kmax + 1, dtype=float)
    size = deg.kmax + 1

    def rhs(t, y):
        s, x = y[:size], y[size:2 * size]
        v = exc.pmf @ x
        new = params.beta * k * v * s
        return np.concatenate([-new, new - params.gamma * x, params.gamma * x])

    y0 = np.concatenate([np.full(size, 1 - epsilon), np.full(size, epsilon), np.zeros(size)])
    grid = sample_grid(t_end, sample_dt)
    sol = solve_ivp(rhs, (0, t_end), y0, method="DOP853", t_eval=grid, rtol=1e-11, atol=1e-13)
    blocks = sol.y.T.reshape(len(grid), 3, size)
    return blocks @ deg.pmf


def test_reduces_to_classical_sir(poisson25, poisson25_excess):
    """With eta = 0 and alpha = 0 nobody is isolated and the model is plain SIR."""
    params = EpidemicParams(alpha=0.0, eta=0.0)
    traj = solve_full(params, poisson25, poisson25_excess, t_end=60.0, rtol=1e-10, atol=1e-12)
    agg = aggregate_full(traj, poisson25)
    oracle = _classical_sir(params, poisson25, poisson25_excess, 1e-3, 60.0, 0.5)

    np.testing.assert_allclose(agg.column("s"), oracle[:, 0], atol=1e-6)
    np.testing.assert_allclose(agg.column("x"), oracle[:, 1], atol=1e-6)
    np.testing.assert_allclose(agg.column("r"), oracle[:, 2], atol=1e-6)
    assert np.abs(agg.column("qS")).max() < 1e-12
    assert np.abs(agg.column("qI")).max() < 1e-12


def test_basic_reproduction_number(table_one, poisson25_excess):
    assert basic_reproduction_number(table_one, poisson25_excess) == pytest.approx(22.5, rel=1e-9)
    with pytest.raises(ParameterError):
        basic_reproduction_number(table_one.replace(gamma=0.0), poisson25_excess)


def test_threshold_behavior(table_one, poisson25, poisson25_excess):
    """R0 = 0.8 dies out; the reference parameters give a large outbreak."""
    beta = 0.8 * table_one.gamma / ((1 - table_one.alpha) * poisson25_excess.mean())
    sub = table_one.replace(beta=beta)
    assert basic_reproduction_number(sub, poisson25_excess) == pytest.approx(0.8)

    below = aggregate_full(solve_full(sub, poisson25, poisson25_excess, t_end=150.0), poisson25)
    above = aggregate_full(solve_full(table_one, poisson25, poisson25_excess, t_end=150.0), poisson25)
    assert final_size(below)["r_final"] < 0.01
    assert final_size(above)["r_final"] > 0.10


def test_early_time_constants(table_one, poisson25, poisson25_excess):
    eps = 1e-3
    model = early_time_model(table_one, poisson25, poisson25_excess, eps)
    K0, K1 = poisson25.mean(), poisson25_excess.mean()
    assert model.c1 == pytest.approx(0.4 * 0.15 * 0.5 * K0 ** 2 * (1 - eps))
    assert model.c2 == pytest.approx(0.6 * 0.15 * K1 * (1 - eps) - 0.1)
    assert model.value(0.0) == pytest.approx(eps, rel=1e-12)
    assert model.limit() == pytest.approx(model.c2 / model.c1)
    # logistic limit reached without overflow
    assert early_time_v(1e4, table_one, poisson25, poisson25_excess, eps) == pytest.approx(model.limit())


def test_early_time_below_threshold_decays(table_one, poisson25, poisson25_excess):
    sub = table_one.replace(beta=0.001)
    model = early_time_model(sub, poisson25, poisson25_excess, 1e-3)
    assert model.c2 < 0
    values = model.value(np.array([0.0, 10.0, 100.0]))
    assert values[0] == pytest.approx(1e-3)
    assert values[1] < values[0] and values[2] < 1e-6
    assert model.limit() == 0.0


def test_early_time_degenerate_at_threshold(table_one, poisson25, poisson25_excess):
    eps = 1e-3
    beta = table_one.gamma / ((1 - table_one.alpha) * poisson25_excess.mean() * (1 - eps))
    with pytest.raises(DegeneracyError):
        early_time_model(table_one.replace(beta=beta), poisson25, poisson25_excess, eps)


def test_early_time_tracks_full_system_then_diverges(table_one, poisson25, poisson25_excess):
    traj = compare_early_time(table_one, poisson25, poisson25_excess, t_end=150.0)
    early = traj.times <= 3.0
    ratio = traj.column("ratio")
    assert np.all((ratio[early] >= 0.9) & (ratio[early] <= 1.1))
    assert np.any((ratio < 0.5) | (ratio > 2.0))


def test_reduced_matches_full_poisson(table_one, poisson25, poisson25_excess):
    """Reduced-system s and r stay within 10% of the full system for Poisson degrees."""
    approx, exact = compare_reduced_full(table_one, poisson25, poisson25_excess, t_end=150.0)
    ratio = ratio_series(approx, exact)
    for name in ("s", "r"):
        column = ratio.column(name)
        assert np.all((column >= 0.9) & (column <= 1.1)), name


@pytest.mark.slow
def test_reduced_matches_full_powerlaw(table_one, powerlaw):
    """Isolated compartments stay within 30% for a heavy-tailed degree law."""
    approx, exact = compare_reduced_full(table_one, powerlaw, excess_of(powerlaw), t_end=150.0)
    ratio = ratio_series(approx, exact)
    for name in ("qS", "qI"):
        column = ratio.column(name)
        assert np.all((column >= 0.7) & (column <= 1.3)), name


def test_reduced_solution_stays_in_box(table_one, poisson25, poisson25_excess):
    traj = solve_reduced(table_one, poisson25, poisson25_excess, t_end=100.0)
    assert traj.values.min() >= -1e-6
    assert traj.values.max() <= 1 + 1e-6
    assert list(traj.to_frame().columns) == ["t", "u", "qS", "v", "qI", "r"]


def test_solve_reduced_from_given_state(table_one, poisson25, poisson25_excess):
    start = ReducedState(u=0.999, v=1e-3)
    traj = solve_reduced(table_one, poisson25, poisson25_excess, t_end=1.0, initial=start)
    assert traj.values[0, 0] == 0.999


def test_expand_reduced():
    np.testing.assert_allclose(expand_reduced(ReducedState(u=0.5), 3), [1.0, 0.5, 0.25, 0.125])


def test_ratio_series_floor():
    times = np.array([0.0, 1.0])
    approx = Trajectory(times=times, values=[[0.0], [2.0]], columns=["x"], kind="scalar")
    exact = Trajectory(times=times, values=[[0.0], [4.0]], columns=["x"], kind="scalar")
    np.testing.assert_allclose(ratio_series(approx, exact).column("x"), [1.0, 0.5])


def test_ratio_series_rejects_mismatched_grids():
    a = Trajectory(times=[0.0, 1.0], values=[[1.0], [1.0]], columns=["x"], kind="scalar")
    b = Trajectory(times=[0.0, 2.0], values=[[1.0], [1.0]], columns=["x"], kind="scalar")
    with pytest.raises(ParameterError):
        ratio_series(a, b)


def test_kmax_mismatch_rejected(table_one, poisson25, powerlaw):
    with pytest.raises(ParameterError):
        FullSystem(table_one, poisson25, excess_of(powerlaw))


def test_parameter_sweep_monotone_in_eta(table_one, poisson25, poisson25_excess):
    """More tracing leaves more susceptibles untouched."""
    results = parameter_sweep("eta", [0.0, 0.5, 1.0], table_one, poisson25, poisson25_excess, t_end=60.0)
    assert [value for value, _ in results] == [0.0, 0.5, 1.0]
    finals = [traj.column("r")[-1] for _, traj in results]
    assert finals[0] > finals[1] > finals[2]
    assert results[0][1].columns == list(COMPARTMENTS)


def test_parameter_sweep_rejects_unknown(table_one, poisson25, poisson25_excess):
    with pytest.raises(ParameterError):
        parameter_sweep("kappa", [1.0], table_one, poisson25, poisson25_excess)
    with pytest.raises(ParameterError):
        parameter_sweep("eta", [0.5], table_one, poisson25, poisson25_excess, system="hybrid")


def test_early_time_solves_its_logistic_equation(table_one, poisson25, poisson25_excess):
    """Central differences of the closed form match c2 v - c1 v^2 on [0, 5]."""
    model = early_time_model(table_one, poisson25, poisson25_excess, 1e-3)
    times = np.linspace(1e-3, 5.0, 201)
    h = 1e-4
    slope = (model.value(times + h) - model.value(times - h)) / (2 * h)
    v = model.value(times)
    np.testing.assert_allclose(slope, model.c2 * v - model.c1 * v ** 2, rtol=1e-6, atol=1e-14)


def test_reduced_rhs_without_tracing(table_one, poisson25, poisson25_excess):
    """With eta = 0 the v equation is the plain transmission-recovery balance."""
    params = table_one.replace(eta=0.0)
    state = ReducedState(u=0.97, qS=0.002, v=0.01, qI=0.001, r=0.02)
    deriv = reduced_rhs(state, params, poisson25, poisson25_excess)
    g1p = poisson25_excess.pgf(state.u, 1)
    expected = (1 - params.alpha) * params.beta * state.v * state.u * g1p - params.gamma * state.v
    assert deriv.v == pytest.approx(expected, rel=1e-12)


def test_recovered_fraction_never_decreases(table_one, poisson25, poisson25_excess):
    traj = solve_full(table_one, poisson25, poisson25_excess, t_end=150.0)
    assert np.all(np.diff(traj.block("r"), axis=0) >= -1e-9)
