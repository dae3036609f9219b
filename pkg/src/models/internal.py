from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

COMPARTMENTS = ["s", "qS", "x", "qI", "r"]
REDUCED_VARIABLES = ["u", "qS", "v", "qI", "r"]


class DistributionKind(str, Enum):
    """Whether a pmf describes node degrees or excess degrees."""

    DEGREE = "degree"
    EXCESS = "excess"


class PgfQuery(BaseModel):
    """Point and derivative order at which a generating function is evaluated."""

    x: float = Field(..., ge=0.0, le=1.0, description="Evaluation point")
    order: int = Field(0, description="0 = g, 1 = g', 2 = g''")


class EpidemicParams(BaseModel):
    """
    Disease rates and tracing policy knobs of the compartmental model.
    Defaults are the reference parameter set (alpha=0.4, beta=0.15,
    gamma=0.1, gamma1=0.1, eta=0.5).
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.4, ge=0.0, le=1.0, description="Probability a new infection is symptomatic")
    beta: float = Field(0.15, ge=0.0, description="Infection rate per infected, non-isolated neighbor")
    gamma: float = Field(0.1, ge=0.0, description="Recovery rate")
    gamma1: float = Field(0.1, ge=0.0, description="Release rate of isolated susceptibles")
    eta: float = Field(0.5, ge=0.0, le=1.0, description="Fraction of neighbors traced and isolated")

    def replace(self, **changes: float) -> "EpidemicParams":
        """Return a validated copy with some fields changed."""
        return EpidemicParams(**{**self.model_dump(), **changes})


class PolicyParams(BaseModel):
    """Contact tracing policy used by the agent-based simulator."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(0.5, ge=0.0, le=1.0, description="Isolation probability of a normal contact")
    quarantine_period: int = Field(14, ge=0, description="Time units a traced susceptible stays isolated")
    h_overlap: float = Field(0.75, ge=0.0, le=1.0, description="Neighborhood overlap threshold for close contacts")
    beta_close: float = Field(0.3, ge=0.0, description="Transmission rate across close-contact edges")
    beta_normal: float = Field(0.15, ge=0.0, description="Transmission rate across normal-contact edges")

    @model_validator(mode="after")
    def _close_contacts_transmit_more(self) -> "PolicyParams":
        if self.beta_close < self.beta_normal:
            raise ValueError("beta_close must be >= beta_normal")
        return self

    def replace(self, **changes: Any) -> "PolicyParams":
        """Return a validated copy with some fields changed."""
        return PolicyParams(**{**self.model_dump(), **changes})


class FullState(BaseModel):
    """
    Per-degree compartment fractions of the full degree-based system.
    Each array is indexed by degree 0..kmax.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    s: np.ndarray
    qS: np.ndarray
    x: np.ndarray
    qI: np.ndarray
    r: np.ndarray
    time: float = 0.0

    @field_validator("s", "qS", "x", "qI", "r", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> np.ndarray:
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _same_length(self) -> "FullState":
        lengths = {len(getattr(self, name)) for name in COMPARTMENTS}
        if len(lengths) != 1:
            raise ValueError(f"compartment arrays differ in length: {sorted(lengths)}")
        return self

    @property
    def kmax(self) -> int:
        return len(self.s) - 1

    def to_vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, name) for name in COMPARTMENTS])

    @classmethod
    def from_vector(cls, y: np.ndarray, time: float = 0.0) -> "FullState":
        blocks = np.split(np.asarray(y, dtype=float), len(COMPARTMENTS))
        return cls(**dict(zip(COMPARTMENTS, blocks)), time=time)

    def compartment_sum(self) -> np.ndarray:
        """s_k + qS_k + x_k + qI_k + r_k for every k."""
        return self.s + self.qS + self.x + self.qI + self.r


class ReducedState(BaseModel):
    """State of the five-variable approximate system."""

    u: float
    qS: float = 0.0
    v: float = 0.0
    qI: float = 0.0
    r: float = 0.0
    time: float = 0.0

    def to_vector(self) -> np.ndarray:
        return np.array([self.u, self.qS, self.v, self.qI, self.r], dtype=float)

    @classmethod
    def from_vector(cls, y: np.ndarray, time: float = 0.0) -> "ReducedState":
        u, qS, v, qI, r = (float(value) for value in y)
        return cls(u=u, qS=qS, v=v, qI=qI, r=r, time=time)


class Trajectory(BaseModel):
    """
    Time samples of an ODE solution.

    `values` has one row per sample. For the full system each named column
    is a block of kmax+1 entries (`block_size`); otherwise blocks are scalar.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    values: np.ndarray
    columns: List[str]
    kind: str = Field(..., description="full | reduced | aggregate | ratio | scalar")
    block_size: int = 1
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("times", "values", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> np.ndarray:
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def _check_shape(self) -> "Trajectory":
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if self.values.ndim == 1:
            self.values = self.values.reshape(-1, 1)
        expected = len(self.columns) * self.block_size
        if self.values.shape != (len(self.times), expected):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({len(self.times)}, {expected})"
            )
        return self

    def __len__(self) -> int:
        return len(self.times)

    def block(self, name: str) -> np.ndarray:
        """Samples of one named column, shape (n_samples, block_size)."""
        i = self.columns.index(name)
        return self.values[:, i * self.block_size:(i + 1) * self.block_size]

    def column(self, name: str) -> np.ndarray:
        """Samples of one scalar column."""
        if self.block_size != 1:
            raise ValueError(f"column '{name}' is a block of {self.block_size} entries")
        return self.values[:, self.columns.index(name)]

    def final(self) -> Dict[str, float]:
        """Last sample of every scalar column."""
        return {name: float(self.column(name)[-1]) for name in self.columns}

    def to_frame(self) -> pd.DataFrame:
        if self.block_size != 1:
            raise ValueError("only scalar trajectories convert to a table")
        frame = pd.DataFrame(self.values, columns=self.columns)
        frame.insert(0, "t", self.times)
        return frame


class SeedSpec(BaseModel):
    """Initial infections of a stochastic run: explicit nodes, a count, or a fraction of n."""

    nodes: Optional[List[int]] = None
    count: Optional[int] = Field(None, ge=0)
    fraction: float = Field(0.001, ge=0.0, le=1.0)


class IntegrationSettings(BaseModel):
    """Initial infected fraction, horizon, output grid and tolerances of an ODE solve."""

    epsilon: float = Field(1e-3, gt=0.0, lt=1.0, description="Initial infected fraction")
    t_end: float = Field(150.0, gt=0.0)
    sample_dt: float = Field(0.5, gt=0.0)
    rtol: float = Field(1e-6, gt=0.0)
    atol: float = Field(1e-9, gt=0.0)
