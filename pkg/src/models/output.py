from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.internal import EpidemicParams, PolicyParams

# --- Stability Models ---
class StabilityClass(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    DEGENERATE = "degenerate"


class StabilityReport(BaseModel):
    """
    Linearization of the reduced (u, qS, v) system at the equilibrium (xi, 0, 0),
    with the constants of the perturbation solution and its limit interval.
    """

    model_config = ConfigDict(frozen=True)

    xi: float
    params: EpidemicParams
    K0: float
    jacobian: List[List[float]]
    A: float
    B: float
    a: float
    h_coef: float
    d1: float
    d2: float
    d3: float
    d4: float
    M: float
    m: float
    L: float
    U: float
    classification: StabilityClass
    pgf_values: Dict[str, float] = Field(default_factory=dict)

    @property
    def J(self) -> np.ndarray:
        return np.array(self.jacobian)

    @property
    def gamma1(self) -> float:
        return self.params.gamma1


class StabilityCheck(BaseModel):
    """Numerical integration of the reduced system compared with the limit interval."""

    xi: float
    epsilon: float
    t_end: float
    u_final: float
    qS_final: float
    v_final: float
    displacement: float
    lower: float
    upper: float
    in_interval: bool
    decayed: bool
    escape_time: Optional[float] = None


# --- Network Models ---
class NetworkStats(BaseModel):
    n: int
    m: int
    K0: float
    rho: float = Field(..., description="Pearson degree correlation over edges (NaN if undefined)")
    C: float = Field(..., description="Global transitivity")
    C_local: float = Field(..., description="Mean local clustering coefficient")


# --- Simulation Models ---
METRICS = ["S", "R", "Q_max", "QI_max", "I_max", "t_q", "t_i"]


class SimulationResult(BaseModel):
    """One stochastic run: per-step compartment fractions and summary metrics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    series: np.ndarray = Field(..., description="Fractions per step: S, I, SQ, IQ, R")
    S: float
    R: float
    Q_max: float
    QI_max: float
    I_max: float
    t_q: int
    t_i: int
    steps: int
    seed: int
    disease: EpidemicParams
    policy: PolicyParams

    def metrics(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in METRICS}


class EnsembleSummary(BaseModel):
    base_seed: int
    n_runs: int
    mean: Dict[str, float]
    std: Dict[str, float]
    runs: List[SimulationResult]
    policy: PolicyParams

    def stderr(self, metric: str) -> float:
        return self.std[metric] / np.sqrt(self.n_runs)


# --- CLI Models ---
class Command(BaseModel):
    subcommand: str
    params: Dict[str, Any]
    output: str


class RunManifest(BaseModel):
    """Everything needed to re-run a command; only wall_clock_seconds varies."""

    subcommand: str
    params: Dict[str, Any]
    version: str
    outputs: List[str]
    decisions: List[str] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def to_lines(self) -> List[str]:
        entries: Dict[str, Any] = {
            "subcommand": self.subcommand,
            "version": self.version,
            "outputs": ";".join(self.outputs),
            "wall_clock_seconds": f"{self.wall_clock_seconds:.3f}",
        }
        entries.update({f"param.{key}": value for key, value in self.params.items()})
        entries.update({f"decision.{i:02d}": text for i, text in enumerate(self.decisions)})
        return [f"{key}={entries[key]}" for key in sorted(entries)]
