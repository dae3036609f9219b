"""
Stability of the Reduced System
===============================
Linearization of the (u, qS, v) part of the reduced system at the
disease-free equilibria (xi, 0, 0), the perturbation solution started from
(xi + eps, eps, eps), and the interval that bounds where u settles.

    a = (1 - alpha) beta xi g1'(xi) - gamma

decides stability: v decays like eps * exp(a t).
"""

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import integrate as quadrature

from src.blocks.dist import DegreeDistribution
from src.blocks.kinetics import ReducedSystem, integrate
from src.core.errors import DegeneracyError, DomainError, ParameterError, SingularityError
from src.models.internal import EpidemicParams, ReducedState
from src.models.output import StabilityCheck, StabilityClass, StabilityReport
from src.utils.logger import get_component_logger

logger = get_component_logger("stability")

DEGENERACY_TOL = 1e-12
DECAY_THRESHOLD = 1e-6
ESCAPE_FACTOR = 10.0
QUAD_TOL = 1e-10
TAIL_RATES = 50.0


def growth_rate(xi: float, params: EpidemicParams, exc: DegreeDistribution) -> float:
    """a = (1 - alpha) beta xi g1'(xi) - gamma."""
    return (1 - params.alpha) * params.beta * xi * float(exc.pgf(xi, 1)) - params.gamma


def linearize(
    xi: float,
    params: EpidemicParams,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
) -> StabilityReport:
    """
    Jacobian, Hessian constants and limit bounds at the equilibrium (xi, 0, 0).

    Raises:
        DomainError: xi outside (0, 1]
        SingularityError: g1'(xi) = 0
        DegeneracyError: a + gamma1 = 0 (h_coef undefined)
    """
    if not 0 < xi <= 1:
        raise DomainError(f"equilibrium xi must lie in (0, 1], got {xi}")

    g0p, g0pp = float(deg.pgf(xi, 1)), float(deg.pgf(xi, 2))
    g1, g1p, g1pp = float(exc.pgf(xi, 0)), float(exc.pgf(xi, 1)), float(exc.pgf(xi, 2))
    if g1p <= 0:
        raise SingularityError(f"g1'({xi}) = 0; the reduced system is singular there")

    alpha, beta, gamma1 = params.alpha, params.beta, params.gamma1
    K0 = deg.mean()
    tracing = alpha * beta * K0 * params.eta
    a = growth_rate(xi, params, exc)

    J12 = gamma1 / g1p
    J13 = -beta * xi - tracing * xi * g0p * g1 / g1p
    J23 = tracing * xi * g0p * g1
    jacobian = [[0.0, J12, J13], [0.0, -gamma1, J23], [0.0, 0.0, a]]

    A = -gamma1 * g1pp / g1p ** 2
    B = -beta - tracing * (
        g0p * g1 / g1p
        + xi * g0pp * g1 / g1p
        - xi * g0p * g1pp * g1 / g1p ** 2
        + xi * g0p
    )

    if abs(a + gamma1) < DEGENERACY_TOL:
        raise DegeneracyError(f"a + gamma1 = 0 at xi={xi}; h_coef is undefined")
    h = J23 / (a + gamma1)

    d1 = A * h + B
    d2 = A * (1 - h)
    d3 = h * gamma1 / g1p + J13
    d4 = (1 - h) * gamma1 / g1p

    M, m = max(a, -gamma1), min(a, -gamma1)
    U = (abs(d3) + abs(d4)) / abs(m) if m != 0 else math.inf
    L = -U

    if abs(a) < DEGENERACY_TOL:
        classification = StabilityClass.DEGENERATE
    elif a < 0:
        classification = StabilityClass.STABLE
    else:
        classification = StabilityClass.UNSTABLE
    logger.debug(f"xi={xi}: a={a:.6g}, {classification.value}, L={L:.6g}, U={U:.6g}")

    return StabilityReport(
        xi=xi, params=params, K0=K0, jacobian=jacobian,
        A=A, B=B, a=a, h_coef=h, d1=d1, d2=d2, d3=d3, d4=d4,
        M=M, m=m, L=L, U=U, classification=classification,
        pgf_values={"g0p": g0p, "g0pp": g0pp, "g1": g1, "g1p": g1p, "g1pp": g1pp},
    )


class PerturbationSolution(BaseModel):
    """
    Linearized response to the perturbation (eps, eps, eps) of (xi, 0, 0):

        y3(t) = eps e^{a t}
        y2(t) = (h e^{a t} + (1 - h) e^{-gamma1 t}) eps
        y1(t) = e^{Phi(t)} (eps e^{-Phi(0)} + int_0^t e^{-Phi(y)} f(y) dy)

    with Phi(t) = (d1/a) eps e^{a t} - (d2/gamma1) eps e^{-gamma1 t} and
    f(y) = d3 eps e^{a y} + d4 eps e^{-gamma1 y}.
    """

    model_config = ConfigDict(frozen=True)

    report: StabilityReport
    epsilon: float

    @property
    def limit_interval(self) -> Tuple[float, float]:
        return self.epsilon * (1 + self.report.L), self.epsilon * (1 + self.report.U)

    def y3(self, t: float) -> float:
        return self.epsilon * math.exp(self.report.a * t)

    def y2(self, t: float) -> float:
        r = self.report
        return (r.h_coef * math.exp(r.a * t) + (1 - r.h_coef) * math.exp(-r.gamma1 * t)) * self.epsilon

    def phi(self, t: float) -> float:
        r = self.report
        value = r.d1 / r.a * self.epsilon * math.exp(r.a * t)
        if r.gamma1 > 0:
            value -= r.d2 / r.gamma1 * self.epsilon * math.exp(-r.gamma1 * t)
        return value

    def _integrand(self, y: float) -> float:
        # scaled by 1/eps so quadrature tolerances are relative to the perturbation size
        r = self.report
        forcing = r.d3 * math.exp(r.a * y) + r.d4 * math.exp(-r.gamma1 * y)
        return math.exp(-self.phi(y)) * forcing

    def _integral(self, t0: float, t1: float) -> float:
        value, _ = quadrature.quad(self._integrand, t0, t1, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        return value

    def y1(self, t: float) -> float:
        base = math.exp(-self.phi(0.0))
        return self.epsilon * math.exp(self.phi(t)) * (base + self._integral(0.0, t))

    def limit_value(self) -> float:
        """
        y1 as t -> infinity for a stable report (Phi -> 0).

        The integral is cut at 50 e-folds of the slowest decaying forcing term.
        """
        r = self.report
        if r.classification != StabilityClass.STABLE:
            raise DegeneracyError("y1 has a finite limit only for stable equilibria")
        if r.gamma1 == 0 and r.d4 != 0:
            raise DegeneracyError("forcing term d4 does not decay when gamma1 = 0")
        rate = abs(r.a) if r.gamma1 == 0 else min(abs(r.a), r.gamma1)
        horizon = TAIL_RATES / rate
        return self.epsilon * (math.exp(-self.phi(0.0)) + self._integral(0.0, horizon))

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Rows (y1, y2, y3) at ascending times, integrating y1 interval by interval."""
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or (len(times) and times[0] < 0):
            raise ParameterError("sample times must be non-negative and ascending")
        base = math.exp(-self.phi(0.0))
        rows = []
        accumulated, previous = 0.0, 0.0
        for t in times:
            accumulated += self._integral(previous, t)
            previous = t
            y1 = self.epsilon * math.exp(self.phi(t)) * (base + accumulated)
            rows.append((y1, self.y2(t), self.y3(t)))
        return np.array(rows).reshape(-1, 3)


def perturbation_solution(report: StabilityReport, epsilon: float) -> PerturbationSolution:
    """Closed-form and quadrature evaluators of the linearized perturbation."""
    if not 0 < epsilon <= 1e-2:
        raise ParameterError(f"perturbation epsilon must lie in (0, 0.01], got {epsilon}")
    if report.classification == StabilityClass.DEGENERATE:
        raise DegeneracyError("a = 0: perturbation solution is undefined")
    return PerturbationSolution(report=report, epsilon=epsilon)


def verify_against_ode(
    report: StabilityReport,
    epsilon: float,
    t_end: float,
    deg: DegreeDistribution,
    exc: DegreeDistribution,
    sample_dt: float = 0.1,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> StabilityCheck:
    """
    Integrate the reduced system from (xi + eps, eps, eps) and compare with the report.

    Stable reports check that u(t_end) - xi falls in the limit interval and
    that qS and v decayed below 1e-6. Unstable reports record the first time
    v exceeds 10 eps.
    """
    if report.classification == StabilityClass.DEGENERATE:
        raise DegeneracyError("cannot verify a degenerate equilibrium")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")

    start = ReducedState(u=report.xi + epsilon, qS=epsilon, v=epsilon)
    traj = integrate(ReducedSystem(report.params, deg, exc), start, t_end, rtol, atol, sample_dt)
    final = traj.final()
    lower, upper = epsilon * (1 + report.L), epsilon * (1 + report.U)
    displacement = final["u"] - report.xi

    escape_time: Optional[float] = None
    if report.classification == StabilityClass.STABLE:
        in_interval = lower < displacement < upper
        decayed = final["qS"] < DECAY_THRESHOLD and final["v"] < DECAY_THRESHOLD
    else:
        in_interval, decayed = False, False
        escaped = np.flatnonzero(traj.column("v") > ESCAPE_FACTOR * epsilon)
        if len(escaped):
            escape_time = float(traj.times[escaped[0]])

    logger.info(
        f"xi={report.xi}: u-xi={displacement:.6g} in ({lower:.6g}, {upper:.6g}) -> {in_interval}; "
        f"decayed={decayed}; escape_time={escape_time}"
    )
    return StabilityCheck(
        xi=report.xi, epsilon=epsilon, t_end=t_end,
        u_final=final["u"], qS_final=final["qS"], v_final=final["v"],
        displacement=displacement, lower=lower, upper=upper,
        in_interval=in_interval, decayed=decayed, escape_time=escape_time,
    )
