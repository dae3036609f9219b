"""
Degree Distributions and Generating Functions
=============================================
Truncated degree distributions, the excess-degree transform, and evaluation
and inversion of probability generating functions (PGFs).

    g(x)   = sum_k p_k x^k
    g'(1)  = mean degree (K0 for degrees, K1 for excess degrees)
"""

import math
from typing import Any, List, Optional, Union

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator
from scipy import optimize, stats

from src.core.errors import DomainError, NumericalError, ParameterError
from src.models.internal import DistributionKind, PgfQuery
from src.utils.logger import get_component_logger

logger = get_component_logger("dist")

DEFAULT_KMAX = 1000
NORMALIZATION_TOL = 1e-12
INVERSION_TOL = 1e-12
INVERSION_MAXITER = 200


class DegreeDistribution(BaseModel):
    """
    A pmf over degrees 0..kmax, normalized on construction and immutable.

    Derivative coefficient arrays are cached so that g, g' and g'' are
    evaluated by Horner recursion without forming k^n or x^k explicitly.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pmf: np.ndarray
    kind: DistributionKind = DistributionKind.DEGREE
    label: str = "custom"

    _coefficients: List[np.ndarray] = PrivateAttr(default_factory=list)
    _mean: float = PrivateAttr(default=0.0)

    @field_validator("pmf", mode="before")
    @classmethod
    def _normalize(cls, value: Any) -> np.ndarray:
        pmf = np.array(value, dtype=float)
        if pmf.ndim != 1 or len(pmf) < 2:
            raise ParameterError("pmf must be one-dimensional with kmax >= 1")
        if not np.all(np.isfinite(pmf)) or np.any(pmf < 0):
            raise ParameterError("pmf entries must be finite and non-negative")
        total = pmf.sum()
        if total <= 0:
            raise ParameterError("pmf has no mass")
        pmf /= total
        pmf.setflags(write=False)
        return pmf

    def model_post_init(self, __context: Any) -> None:
        coefficients = []
        c = np.array(self.pmf)
        for order in range(3):
            trimmed = np.trim_zeros(c, "b")
            coefficients.append(trimmed if len(trimmed) else np.zeros(1))
            c = P.polyder(c) if len(c) > 1 else np.zeros(1)
        self._coefficients = coefficients
        self._mean = float(P.polyval(1.0, coefficients[1]))

    @property
    def kmax(self) -> int:
        return len(self.pmf) - 1

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.kmax + 1)

    def mean(self) -> float:
        """g'(1): K0 for a degree distribution, K1 for an excess distribution."""
        return self._mean

    def support(self) -> np.ndarray:
        """Degrees carrying positive probability."""
        return np.flatnonzero(self.pmf > 0)

    def pgf(self, x: Union[float, np.ndarray], order: int = 0) -> Union[float, np.ndarray]:
        """
        Evaluate g, g' or g'' at x (scalar or array). No range check on x.

        Args:
            x: Evaluation point(s)
            order: 0, 1 or 2

        Returns:
            The derivative of the given order at x
        """
        if order not in (0, 1, 2):
            raise ParameterError(f"PGF derivative order must be 0, 1 or 2, got {order}")
        return P.polyval(x, self._coefficients[order])


def make_poisson(mean: float, kmax: int = DEFAULT_KMAX) -> DegreeDistribution:
    """Poisson(mean) truncated to 0..kmax and renormalized."""
    if not (mean > 0 and math.isfinite(mean)):
        raise ParameterError(f"Poisson mean must be positive, got {mean}")
    if kmax < 1:
        raise ParameterError(f"kmax must be >= 1, got {kmax}")
    pmf = stats.poisson.pmf(np.arange(kmax + 1), mean)
    return DegreeDistribution(pmf=pmf, label=f"poisson(mean={mean:g},kmax={kmax})")


def make_powerlaw(exponent: float = -2.5, kmin: int = 1, kmax: int = DEFAULT_KMAX) -> DegreeDistribution:
    """p_k proportional to k**exponent on kmin..kmax, zero below kmin."""
    if not exponent < 0:
        raise ParameterError(f"power-law exponent must be negative, got {exponent}")
    if kmin < 1:
        raise ParameterError("power-law support must start at kmin >= 1 (k**exponent undefined at 0)")
    if kmin > kmax:
        raise ParameterError(f"kmin={kmin} exceeds kmax={kmax}")
    k = np.arange(kmax + 1, dtype=float)
    pmf = np.zeros(kmax + 1)
    pmf[kmin:] = k[kmin:] ** exponent
    return DegreeDistribution(
        pmf=pmf, label=f"powerlaw(exponent={exponent:g},kmin={kmin},kmax={kmax})"
    )


def make_distribution(
    name: str,
    mean: float = 25.0,
    exponent: float = -2.5,
    kmin: int = 1,
    kmax: int = DEFAULT_KMAX,
) -> DegreeDistribution:
    """Build a named degree distribution ('poisson' or 'powerlaw')."""
    if name == "poisson":
        return make_poisson(mean, kmax)
    if name == "powerlaw":
        return make_powerlaw(exponent, kmin, kmax)
    raise ParameterError(f"unknown distribution '{name}'")


def excess_of(d: DegreeDistribution) -> DegreeDistribution:
    """
    Excess-degree distribution w_k = (k+1) p_{k+1} / K0.

    The result keeps d's kmax (w_kmax = 0) so both distributions index the
    same degree classes.
    """
    if d.kind != DistributionKind.DEGREE:
        raise ParameterError("excess_of expects a degree distribution")
    k0 = d.mean()
    if k0 <= 0:
        raise ParameterError("mean degree is zero; excess distribution undefined")
    w = np.zeros(d.kmax + 1)
    w[:-1] = np.arange(1, d.kmax + 1) * d.pmf[1:] / k0
    return DegreeDistribution(pmf=w, kind=DistributionKind.EXCESS, label=f"excess({d.label})")


def pgf_eval(d: DegreeDistribution, q: PgfQuery) -> float:
    """Evaluate the PGF of d (order 0, 1 or 2) at q.x in [0, 1]."""
    return float(d.pgf(q.x, q.order))


def pgf_invert(d: DegreeDistribution, y: float, tol: float = INVERSION_TOL) -> float:
    """
    Solve g(x) = y for x in [0, 1] by bisection.

    g is increasing on [0, 1] whenever d has mass above degree 0, so the root
    is unique for y in (g(0), 1].

    Raises:
        DomainError: y outside (g(0), 1]
        ParameterError: d is a point mass at degree 0
        NumericalError: Bisection ends with a residual above tol
    """
    g0 = float(d.pmf[0])
    if g0 >= 1.0:
        raise ParameterError("PGF is constant (point mass at degree 0); cannot invert")
    if y > 1.0:
        raise DomainError(f"cannot invert PGF at y={y} > 1")
    if y < g0:
        raise DomainError(f"cannot invert PGF at y={y} < g(0)={g0}")
    if y == 1.0:
        return 1.0
    if y == g0:
        return 0.0

    root = optimize.bisect(
        lambda x: float(d.pgf(x, 0)) - y,
        0.0, 1.0,
        xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=INVERSION_MAXITER,
        disp=False,
    )
    residual = abs(float(d.pgf(root, 0)) - y)
    if residual > tol:
        raise NumericalError(f"PGF inversion residual {residual:.2e} exceeds {tol:.0e} at y={y}")
    logger.debug(f"g^-1({y}) = {root!r} for {d.label}")
    return float(root)
