"""
Compartmental Kinetics
======================
Right-hand sides and integration of the degree-based system (five
compartments per degree class), the reduced five-variable system obtained
from the ansatz s_k = u^k, the early-time logistic closed form, and the
epidemic threshold.

Full system, with v = sum_k w_k x_k and the tracing rate
T = alpha * beta * v * K0 * eta * sum_l l s_l p_l:

    ds_k/dt  = -beta k v s_k - T s_k + gamma1 qS_k
    dqS_k/dt = T s_k - gamma1 qS_k
    dx_k/dt  = (1-alpha) beta k v s_k - T x_k - gamma x_k
    dqI_k/dt = alpha beta k v s_k + T x_k - gamma qI_k
    dr_k/dt  = gamma x_k + gamma qI_k
"""

import math
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import solve_ivp

from src.blocks.dist import DegreeDistribution, pgf_invert
from src.core.errors import (
    DegeneracyError,
    InvariantViolation,
    ParameterError,
    SingularityError,
    StiffnessError,
)
from src.models.internal import (
    COMPARTMENTS,
    REDUCED_VARIABLES,
    EpidemicParams,
    FullState,
    ReducedState,
    Trajectory,
)
from src.utils.logger import get_component_logger

logger = get_component_logger("kinetics")

DEFAULT_EPSILON = 1e-3
DEFAULT_T_END = 150.0
DEFAULT_SAMPLE_DT = 0.5
DEFAULT_RTOL = 1e-6
DEFAULT_ATOL = 1e-9
BOX_TOL = 1e-6
SINGULARITY_TOL = 1e-12
DEGENERACY_TOL = 1e-14
RATIO_FLOOR = 1e-12

SweepParameter = Literal["eta", "alpha", "beta", "gamma", "gamma1"]


def _check_kmax(deg: DegreeDistribution, exc: DegreeDistribution, kmax: Optional[int] = None):
    if deg.kmax != exc.kmax or (kmax is not None and kmax != deg.kmax):
        raise ParameterError(
            f"kmax mismatch: degree {deg.kmax}, excess {exc.kmax}"
            + (f", state {kmax}" if kmax is not None else "")
        )


# --- Right-hand sides ---
class FullSystem:
    """dy/dt of the degree-based system over the flat vector (s, qS, x, qI, r)."""

    columns = COMPARTMENTS
    kind = "full"

    def __init__(self, params: EpidemicParams, deg: DegreeDistribution, exc: DegreeDistribution):
        _check_kmax(deg, exc)
        self.params = params
        self.deg = deg
        self.exc = exc
        self.block_size = deg.kmax + 1
        self._k = deg.degrees.astype(float)
        self._kp = self._k * deg.pmf
        self._K0 = deg.mean()

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        p = self.params
        s, qS, x, qI, r = y.reshape(5, self.block_size)
        v = self.exc.pmf @ x
        tracing = p.alpha * p.beta * v * self._K0 * p.eta * (self._kp @ s)
        infection = p.beta * self._k * v * s

        return np.concatenate([
            -infection - tracing * s + p.gamma1 * qS,
            tracing * s - p.gamma1 * qS,
            (1 - p.alpha) * infection - tracing * x - p.gamma * x,
            p.alpha * infection + tracing * x - p.gamma * qI,
            p.gamma * (x + qI),
        ])


class ReducedSystem:
    """dy/dt of the reduced system over the vector (u, qS, v, qI, r)."""

    columns = REDUCED_VARIABLES
    kind = "reduced"
    block_size = 1

    def __init__(self, params: EpidemicParams, deg: DegreeDistribution, exc: DegreeDistribution):
        _check_kmax(deg, exc)
        self.params = params
        self.deg = deg
        self.exc = exc
        self._K0 = deg.mean()

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        p = self.params
        u, qS, v, qI, r = y
        g0p = self.deg.pgf(u, 1)
        g1 = self.exc.pgf(u, 0)
        g1p = self.exc.pgf(u, 1)
        if g1p < SINGULARITY_TOL:
            raise SingularityError(f"g1'(u) = {g1p:.3e} vanishes at u={u:.6g} (t={t:.6g})")

        tracing = p.alpha * p.beta * self._K0 * p.eta * v * u * g0p
        return np.array([
            -p.beta * v * u - tracing * g1 / g1p + p.gamma1 * qS / g1p,
            tracing * g1 - p.gamma1 * qS,
            (1 - p.alpha) * p.beta * v * u * g1p - tracing * v - p.gamma * v,
            p.alpha * p.beta * v * u * g1p + tracing * v - p.gamma * qI,
            p.gamma * (v + qI),
        ])


def full_rhs(
    state: FullState,
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
) -> FullState:
    """Derivative of a full-system state, returned as a FullState."""
    _check_kmax(deg, exc, state.kmax)
    dy = FullSystem(params, deg, exc)(state.time, state.to_vector())
    return FullState.from_vector(dy, time=state.time)


def reduced_rhs(
    state: ReducedState,
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
) -> ReducedState:
    """Derivative of a reduced-system state, returned as a ReducedState."""
    dy = ReducedSystem(params, deg, exc)(state.time, state.to_vector())
    return ReducedState.from_vector(dy, time=state.time)


# --- Initial conditions ---
def full_initial_state(kmax: int, epsilon: float = DEFAULT_EPSILON) -> FullState:
    """s_k(0) = 1 - epsilon, x_k(0) = epsilon, everything else 0."""
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    zeros = np.zeros(kmax + 1)
    return FullState(s=np.full(kmax + 1, 1 - epsilon), qS=zeros, x=np.full(kmax + 1, epsilon), qI=zeros, r=zeros)


def reduced_initial_state(exc: DegreeDistribution, epsilon: float = DEFAULT_EPSILON) -> ReducedState:
    """u(0) = g1^-1(1 - epsilon), v(0) = epsilon, everything else 0."""
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    return ReducedState(u=pgf_invert(exc, 1 - epsilon), v=epsilon)


# --- Integration ---
def sample_grid(t_end: float, sample_dt: float) -> np.ndarray:
    """Sample times 0, dt, 2dt, ... ending exactly at t_end."""
    n = int(math.floor(t_end / sample_dt + 1e-9))
    grid = np.arange(n + 1) * sample_dt
    if t_end - grid[-1] > 1e-9 * t_end:
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end
    return grid


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Union[np.ndarray, FullState, ReducedState],
    t_end: float = DEFAULT_T_END,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    metadata: Optional[Dict] = None,
) -> Trajectory:
    """
    Integrate dy/dt = rhs(t, y) with the adaptive Dormand-Prince RK 4(5) pair.

    Args:
        rhs: Callable (t, y) -> dy/dt. Its `columns`, `kind` and `block_size`
            attributes, when present, name the trajectory columns.
        y0: Initial vector or state
        t_end: Final time (> 0)
        rtol, atol: Error tolerances (> 0)
        sample_dt: Spacing of the dense-output samples

    Returns:
        Trajectory sampled on 0, sample_dt, ..., t_end

    Raises:
        StiffnessError: The step size collapsed before t_end
    """
    if not t_end > 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    if not (rtol > 0 and atol > 0 and sample_dt > 0):
        raise ParameterError("tolerances and sample_dt must be positive")

    y0 = y0.to_vector() if isinstance(y0, (FullState, ReducedState)) else np.atleast_1d(np.asarray(y0, dtype=float))
    columns = list(getattr(rhs, "columns", [f"y{i}" for i in range(len(y0))]))
    block_size = getattr(rhs, "block_size", 1)
    grid = sample_grid(t_end, sample_dt)

    sol = solve_ivp(rhs, (0.0, t_end), y0, method="RK45", t_eval=grid, rtol=rtol, atol=atol)
    if sol.status != 0:
        failed_at = float(sol.t[-1]) if len(sol.t) else 0.0
        raise StiffnessError(failed_at, sol.message)
    logger.debug(f"RK45 reached t={t_end} with {sol.nfev} evaluations")

    meta = {"rtol": rtol, "atol": atol, "nfev": int(sol.nfev)}
    meta.update(metadata or {})
    return Trajectory(
        times=sol.t,
        values=sol.y.T,
        columns=columns,
        kind=getattr(rhs, "kind", "scalar"),
        block_size=block_size,
        metadata=meta,
    )


def _check_box(traj: Trajectory, tol: float = BOX_TOL) -> None:
    low, high = traj.values.min(), traj.values.max()
    if low < -tol or high > 1 + tol:
        i = int(np.argmax((traj.values < -tol).any(axis=1) | (traj.values > 1 + tol).any(axis=1)))
        raise InvariantViolation(
            f"{traj.kind} state left [-{tol:g}, 1+{tol:g}] at t={traj.times[i]:.6g} "
            f"(min {low:.3e}, max {high:.6f})"
        )


def _solve_metadata(params: EpidemicParams, deg: DegreeDistribution, exc: DegreeDistribution, epsilon: float) -> Dict:
    return {
        "params": params.model_dump(),
        "degree": deg.label,
        "excess": exc.label,
        "epsilon": epsilon,
    }


def solve_full(
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
    t_end: float = DEFAULT_T_END,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """Integrate the full system from the standard initial condition."""
    system = FullSystem(params, deg, exc)
    logger.info(f"Solving full system: {5 * system.block_size} equations, t_end={t_end}")
    traj = integrate(
        system, full_initial_state(deg.kmax, epsilon), t_end, rtol, atol, sample_dt,
        metadata=_solve_metadata(params, deg, exc, epsilon),
    )
    _check_box(traj)
    return traj


def solve_reduced(
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
    t_end: float = DEFAULT_T_END,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    initial: Optional[ReducedState] = None,
) -> Trajectory:
    """Integrate the reduced system, by default from u(0) = g1^-1(1 - epsilon), v(0) = epsilon."""
    system = ReducedSystem(params, deg, exc)
    y0 = initial if initial is not None else reduced_initial_state(exc, epsilon)
    logger.info(f"Solving reduced system from u(0)={y0.u:.12g}, t_end={t_end}")
    traj = integrate(
        system, y0, t_end, rtol, atol, sample_dt,
        metadata=_solve_metadata(params, deg, exc, epsilon),
    )
    _check_box(traj)
    return traj


# --- Aggregation ---
def aggregate_full(traj: Trajectory, weights: DegreeDistribution) -> Trajectory:
    """
    Collapse a full trajectory to five scalars sum_k p_k (compartment)_k.

    Weighting by the degree distribution gives node fractions; weighting by
    the excess distribution gives the edge-weighted quantities that the
    reduced system tracks (qS, v, qI, r).
    """
    if traj.kind != "full":
        raise ParameterError(f"aggregate_full expects a full trajectory, got '{traj.kind}'")
    if traj.block_size != weights.kmax + 1:
        raise ParameterError(f"trajectory kmax {traj.block_size - 1} != distribution kmax {weights.kmax}")
    values = np.column_stack([traj.block(name) @ weights.pmf for name in traj.columns])
    return Trajectory(
        times=traj.times, values=values, columns=list(COMPARTMENTS), kind="aggregate",
        metadata={**traj.metadata, "weights": weights.label},
    )


def expand_reduced(state: ReducedState, kmax: int) -> np.ndarray:
    """s_k = u^k for k = 0..kmax."""
    return float(state.u) ** np.arange(kmax + 1)


def conservation_error(traj: Trajectory) -> float:
    """Largest |s_k + qS_k + x_k + qI_k + r_k - 1| over all samples and degrees."""
    total = sum(traj.block(name) for name in COMPARTMENTS)
    return float(np.abs(total - 1.0).max())


def final_size(traj: Trajectory) -> Dict[str, float]:
    """Terminal recovered fraction and peak isolated/infected fractions of a scalar trajectory."""
    r = traj.column("r")
    infected = "x" if "x" in traj.columns else "v"
    return {
        "r_final": float(r[-1]),
        "qS_peak": float(traj.column("qS").max()),
        "infected_peak": float(traj.column(infected).max()),
        "qI_peak": float(traj.column("qI").max()),
    }


# --- Early-time closed form ---
class EarlyTimeModel(BaseModel):
    """
    Logistic solution of dv/dt = c2 v - c1 v^2 with v(0) = epsilon.

    c1 = alpha beta eta K0^2 (1 - eps), c2 = (1 - alpha) beta K1 (1 - eps) - gamma,
    D1 = eps / (c2 - c1 eps).
    """

    model_config = ConfigDict(frozen=True)

    c1: float
    c2: float
    D1: float
    epsilon: float

    def value(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        if not math.isfinite(self.D1):
            # epsilon sits on the equilibrium c2/c1
            out = np.full_like(t, self.epsilon)
        elif self.c2 > 0:
            out = self.c2 * self.D1 / (np.exp(-self.c2 * t) + self.c1 * self.D1)
        else:
            grow = np.exp(self.c2 * t)
            out = self.c2 * self.D1 * grow / (1 + self.c1 * self.D1 * grow)
        return float(out) if out.ndim == 0 else out

    def limit(self) -> float:
        """v(infinity): c2/c1 above threshold, 0 below."""
        if self.c2 < 0:
            return 0.0
        return self.c2 / self.c1 if self.c1 > 0 else math.inf


def early_time_model(
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
) -> EarlyTimeModel:
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    K0, K1 = deg.mean(), exc.mean()
    c1 = params.alpha * params.beta * params.eta * K0 ** 2 * (1 - epsilon)
    c2 = (1 - params.alpha) * params.beta * K1 * (1 - epsilon) - params.gamma
    if abs(c2) < DEGENERACY_TOL:
        raise DegeneracyError("c2 = 0: logistic early-time form is undefined at the threshold")
    denom = c2 - c1 * epsilon
    D1 = epsilon / denom if denom != 0 else math.inf
    return EarlyTimeModel(c1=c1, c2=c2, D1=D1, epsilon=epsilon)


def early_time_v(
    t: Union[float, np.ndarray],
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
) -> Union[float, np.ndarray]:
    """Closed-form early-time v(t)."""
    return early_time_model(params, deg, exc, epsilon).value(t)


def basic_reproduction_number(params: EpidemicParams, exc: DegreeDistribution) -> float:
    """R0 = (1 - alpha) beta K1 / gamma."""
    if params.gamma <= 0:
        raise ParameterError("R0 is undefined for gamma = 0")
    return (1 - params.alpha) * params.beta * exc.mean() / params.gamma


# --- Comparisons ---
def ratio_series(approx: Trajectory, exact: Trajectory, floor: float = RATIO_FLOOR) -> Trajectory:
    """
    Pointwise approx/exact per column; 1 where both values are below `floor`.
    """
    if len(approx) != len(exact) or not np.allclose(approx.times, exact.times, rtol=0, atol=1e-9):
        raise ParameterError("ratio_series needs trajectories on the same time grid")
    if approx.values.shape != exact.values.shape:
        raise ParameterError(f"column mismatch: {approx.values.shape} vs {exact.values.shape}")

    a, e = approx.values, exact.values
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = a / e
    ratio[(np.abs(a) < floor) & (np.abs(e) < floor)] = 1.0
    return Trajectory(
        times=exact.times, values=ratio, columns=list(exact.columns), kind="ratio",
        metadata={"floor": floor},
    )


def compare_reduced_full(
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
    t_end: float = DEFAULT_T_END,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Tuple[Trajectory, Trajectory]:
    """
    Solve both systems and align them on the columns s, qS, x, qI, r.

    Approximate s is g0(u) and the other columns are the reduced variables
    (x is v). Exact s is node-weighted; the other columns are edge-weighted.
    """
    reduced = solve_reduced(params, deg, exc, epsilon, t_end, sample_dt, rtol, atol)
    full = solve_full(params, deg, exc, epsilon, t_end, sample_dt, rtol, atol)

    approx_values = reduced.values.copy()
    approx_values[:, 0] = deg.pgf(reduced.column("u"), 0)
    approx = Trajectory(
        times=reduced.times, values=approx_values, columns=list(COMPARTMENTS),
        kind="aggregate", metadata=reduced.metadata,
    )

    by_edge = aggregate_full(full, exc)
    exact_values = by_edge.values.copy()
    exact_values[:, 0] = full.block("s") @ deg.pmf
    exact = Trajectory(
        times=full.times, values=exact_values, columns=list(COMPARTMENTS),
        kind="aggregate", metadata=full.metadata,
    )
    return approx, exact


def compare_early_time(
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    epsilon: float = DEFAULT_EPSILON,
    t_end: float = DEFAULT_T_END,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """Early-time v(t) against the full-system v(t) = sum_k w_k x_k, with their ratio."""
    model = early_time_model(params, deg, exc, epsilon)
    full = solve_full(params, deg, exc, epsilon, t_end, sample_dt, rtol, atol)
    v_full = full.block("x") @ exc.pmf
    v_early = model.value(full.times)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            (np.abs(v_early) < RATIO_FLOOR) & (np.abs(v_full) < RATIO_FLOOR), 1.0, v_early / v_full
        )
    return Trajectory(
        times=full.times,
        values=np.column_stack([v_early, v_full, ratio]),
        columns=["v_early", "v_full", "ratio"],
        kind="scalar",
        metadata={**full.metadata, "c1": model.c1, "c2": model.c2, "D1": model.D1},
    )


def parameter_sweep(
    parameter: SweepParameter,
    values: Sequence[float],
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    system: Literal["full", "reduced"] = "full",
    epsilon: float = DEFAULT_EPSILON,
    t_end: float = DEFAULT_T_END,
    sample_dt: float = DEFAULT_SAMPLE_DT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> List[Tuple[float, Trajectory]]:
    """
    Aggregate trajectories (s, qS, x, qI, r) for each value of one parameter.

    Full-system curves are node-weighted; reduced-system curves use s = g0(u)
    and the edge-weighted reduced variables.
    """
    if parameter not in EpidemicParams.model_fields:
        raise ParameterError(f"unknown sweep parameter '{parameter}'")
    if not values:
        raise ParameterError("parameter sweep needs at least one value")

    results = []
    for value in values:
        swept = params.replace(**{parameter: float(value)})
        if system == "full":
            traj = aggregate_full(solve_full(swept, deg, exc, epsilon, t_end, sample_dt, rtol, atol), deg)
        elif system == "reduced":
            reduced = solve_reduced(swept, deg, exc, epsilon, t_end, sample_dt, rtol, atol)
            vals = reduced.values.copy()
            vals[:, 0] = deg.pgf(reduced.column("u"), 0)
            traj = Trajectory(
                times=reduced.times, values=vals, columns=list(COMPARTMENTS),
                kind="aggregate", metadata=reduced.metadata,
            )
        else:
            raise ParameterError(f"unknown system '{system}'")
        logger.info(f"{parameter}={value:g}: r(t_end)={traj.column('r')[-1]:.6f}")
        results.append((float(value), traj))
    return results
