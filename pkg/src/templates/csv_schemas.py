"""
Output Schemas - Structured CSV Definitions
===========================================
Every table the CLI writes is declared here:
- Columns: Names, types and meaning, in output order
- Rules: Row-level checks applied before writing
- Formatting: '%.10g' floats, ',' separator, '.' decimal, LF line endings

The engine refuses frames whose columns or dtypes differ from the schema, so each
subcommand's header is fixed and documented in one place.
"""

from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import pandas as pd
from pandas.api import types as ptypes
from pydantic import BaseModel, Field

from src.core.errors import InvariantViolation, ParameterError
from src.models.output import METRICS

FLOAT_FORMAT = "%.10g"


class ColumnType(Enum):
    """Types of columns in output tables."""
    FLOAT = "float"
    INT = "int"
    STRING = "string"
    BOOL = "bool"


class ColumnSpec(BaseModel):
    """Definition of a single output column."""

    name: str
    column_type: ColumnType = ColumnType.FLOAT
    description: str = ""


class SchemaRule(BaseModel):
    """Row-level check applied to a table before it is written."""

    name: str
    description: str
    check: str  # key into OutputEngine.CHECKS
    columns: List[str] = Field(default_factory=list)
    tolerance: float = 0.0


class OutputSchema(BaseModel):
    """Complete definition of one CSV table."""

    name: str
    description: str
    columns: List[ColumnSpec]
    rules: List[SchemaRule] = Field(default_factory=list)

    @property
    def header(self) -> List[str]:
        return [c.name for c in self.columns]


def _floats(*names: str, description: str = "") -> List[ColumnSpec]:
    return [ColumnSpec(name=n, description=description) for n in names]


# =============================================================================
# SCHEMA DEFINITIONS
# =============================================================================

COMPARTMENTS_SCHEMA = OutputSchema(
    name="compartments",
    description="Node-weighted compartment fractions of the full system",
    columns=_floats("t", "s", "qS", "x", "qI", "r"),
    rules=[
        SchemaRule(
            name="conservation",
            description="The five compartments sum to 1 in every row",
            check="row_sum_one",
            columns=["s", "qS", "x", "qI", "r"],
            tolerance=1e-6,
        )
    ],
)

REDUCED_SCHEMA = OutputSchema(
    name="reduced",
    description="Reduced-system variables (u and edge-weighted qS, v, qI, r)",
    columns=_floats("t", "u", "qS", "v", "qI", "r"),
)

RATIO_SCHEMA = OutputSchema(
    name="ratio",
    description="Approximate / exact per compartment (x of the reduced system is v)",
    columns=_floats("t", "s", "qS", "x", "qI", "r"),
)

EARLY_TIME_SCHEMA = OutputSchema(
    name="early_time",
    description="Closed-form early-time v(t)",
    columns=_floats("t", "v_early"),
)

EARLY_TIME_COMPARE_SCHEMA = OutputSchema(
    name="early_time_compare",
    description="Early-time v(t) against full-system v(t) and their ratio",
    columns=_floats("t", "v_early", "v_full", "ratio"),
)

SWEEP_SCHEMA = OutputSchema(
    name="sweep",
    description="Aggregate compartments for each value of one swept parameter",
    columns=[ColumnSpec(name="parameter", column_type=ColumnType.STRING)]
    + _floats("value", "t", "s", "qS", "x", "qI", "r"),
)

STABILITY_SCHEMA = OutputSchema(
    name="stability",
    description="Linearization at (xi, 0, 0): growth rate, constants and limit bounds",
    columns=_floats("xi", "a")
    + [ColumnSpec(name="classification", column_type=ColumnType.STRING)]
    + _floats("A", "B", "h_coef", "d1", "d2", "d3", "d4", "M", "m", "L", "U")
    + _floats(*[f"J{i}{j}" for i in range(1, 4) for j in range(1, 4)]),
)

PERTURBATION_SCHEMA = OutputSchema(
    name="perturbation",
    description="Linearized perturbation (y1, y2, y3) around each equilibrium",
    columns=_floats("xi", "t", "y1", "y2", "y3"),
)

STABILITY_CHECK_SCHEMA = OutputSchema(
    name="stability_check",
    description="Reduced-system integration from (xi + eps, eps, eps) against the limit interval",
    columns=_floats("xi", "epsilon", "t_end", "u_final", "qS_final", "v_final", "displacement", "lower", "upper")
    + [
        ColumnSpec(name="in_interval", column_type=ColumnType.BOOL),
        ColumnSpec(name="decayed", column_type=ColumnType.BOOL),
    ]
    + _floats("escape_time"),
)

NETSTAT_SCHEMA = OutputSchema(
    name="netstat",
    description="Size, mean degree, degree correlation and clustering of a contact graph",
    columns=[
        ColumnSpec(name="n", column_type=ColumnType.INT),
        ColumnSpec(name="m", column_type=ColumnType.INT),
    ]
    + _floats("K0", "rho", "C", "C_local"),
)

EDGES_SCHEMA = OutputSchema(
    name="edges",
    description="Edges with their contact type",
    columns=[
        ColumnSpec(name="u", column_type=ColumnType.INT),
        ColumnSpec(name="v", column_type=ColumnType.INT),
        ColumnSpec(name="kind", column_type=ColumnType.STRING),
    ],
)

MAPPING_SCHEMA = OutputSchema(
    name="mapping",
    description="Internal node index against the id in the input file",
    columns=[
        ColumnSpec(name="node", column_type=ColumnType.INT),
        ColumnSpec(name="label", column_type=ColumnType.INT),
    ],
)

_POLICY_COLUMNS = _floats("eta") + [ColumnSpec(name="quarantine_period", column_type=ColumnType.INT)] + _floats("h_overlap")

ENSEMBLE_SCHEMA = OutputSchema(
    name="ensemble",
    description="Per-policy ensemble means and standard deviations of the run metrics",
    columns=_POLICY_COLUMNS
    + [ColumnSpec(name="runs", column_type=ColumnType.INT)]
    + [c for metric in METRICS for c in _floats(f"{metric}_mean", f"{metric}_std")],
    rules=[
        SchemaRule(
            name="fractions",
            description="Mean fractions lie in [0, 1]",
            check="within_unit",
            columns=["S_mean", "R_mean", "Q_max_mean", "QI_max_mean", "I_max_mean"],
            tolerance=1e-12,
        )
    ],
)

RUNS_SCHEMA = OutputSchema(
    name="runs",
    description="Metrics of every individual run",
    columns=_POLICY_COLUMNS
    + [ColumnSpec(name="run", column_type=ColumnType.INT), ColumnSpec(name="seed", column_type=ColumnType.INT)]
    + _floats("S", "R", "Q_max", "QI_max", "I_max")
    + [ColumnSpec(name=name, column_type=ColumnType.INT) for name in ("t_q", "t_i", "steps")],
)

TIMESERIES_SCHEMA = OutputSchema(
    name="timeseries",
    description="Compartment fractions per step of one stochastic run",
    columns=[ColumnSpec(name="t", column_type=ColumnType.INT)] + _floats("S", "I", "SQ", "IQ", "R"),
    rules=[
        SchemaRule(
            name="partition",
            description="Compartment fractions sum to 1 in every step",
            check="row_sum_one",
            columns=["S", "I", "SQ", "IQ", "R"],
            tolerance=1e-9,
        )
    ],
)


# =============================================================================
# OUTPUT ENGINE
# =============================================================================

def _row_sum_one(frame: pd.DataFrame, rule: SchemaRule) -> Optional[str]:
    deviation = (frame[rule.columns].sum(axis=1) - 1.0).abs()
    if len(frame) and deviation.max() > rule.tolerance:
        return f"row sums deviate from 1 by {deviation.max():.3e}"
    return None


def _within_unit(frame: pd.DataFrame, rule: SchemaRule) -> Optional[str]:
    values = frame[rule.columns].to_numpy(dtype=float)
    if values.size and (values.min() < -rule.tolerance or values.max() > 1 + rule.tolerance):
        return f"values outside [0, 1]: min {values.min():.3e}, max {values.max():.6f}"
    return None


TYPE_CHECKS: Dict[ColumnType, Callable[[pd.Series], bool]] = {
    ColumnType.FLOAT: lambda s: ptypes.is_numeric_dtype(s) and not ptypes.is_bool_dtype(s),
    ColumnType.INT: ptypes.is_integer_dtype,
    ColumnType.STRING: lambda s: ptypes.is_string_dtype(s) or ptypes.is_object_dtype(s),
    ColumnType.BOOL: ptypes.is_bool_dtype,
}


class OutputEngine:
    """
    Assembles and writes CSV tables from their schema definitions.

    Responsibilities:
    1. Look up schemas by name
    2. Check column order and schema rules
    3. Write deterministic CSV (same frame, same bytes)
    """

    SCHEMAS: Dict[str, OutputSchema] = {
        schema.name: schema
        for schema in (
            COMPARTMENTS_SCHEMA, REDUCED_SCHEMA, RATIO_SCHEMA, EARLY_TIME_SCHEMA,
            EARLY_TIME_COMPARE_SCHEMA, SWEEP_SCHEMA, STABILITY_SCHEMA, PERTURBATION_SCHEMA,
            STABILITY_CHECK_SCHEMA, NETSTAT_SCHEMA, EDGES_SCHEMA, MAPPING_SCHEMA,
            ENSEMBLE_SCHEMA, RUNS_SCHEMA, TIMESERIES_SCHEMA,
        )
    }

    CHECKS: Dict[str, Callable[[pd.DataFrame, SchemaRule], Optional[str]]] = {
        "row_sum_one": _row_sum_one,
        "within_unit": _within_unit,
    }

    @classmethod
    def get_schema(cls, name: str) -> OutputSchema:
        schema = cls.SCHEMAS.get(name)
        if schema is None:
            raise ParameterError(f"unknown output schema '{name}'")
        return schema

    @classmethod
    def validate(cls, frame: pd.DataFrame, schema_name: str) -> pd.DataFrame:
        """
        Check a frame against its schema.

        Raises:
            ParameterError: Columns differ from the schema header, or a column has the wrong dtype
            InvariantViolation: A schema rule fails
        """
        schema = cls.get_schema(schema_name)
        if list(frame.columns) != schema.header:
            raise ParameterError(
                f"table '{schema_name}' has columns {list(frame.columns)}, expected {schema.header}"
            )
        for column in schema.columns:
            if not TYPE_CHECKS[column.column_type](frame[column.name]):
                raise ParameterError(
                    f"table '{schema_name}' column '{column.name}' has dtype {frame[column.name].dtype}, "
                    f"expected {column.column_type.value}"
                )
        for rule in schema.rules:
            problem = cls.CHECKS[rule.check](frame, rule)
            if problem:
                raise InvariantViolation(f"{schema_name}.{rule.name}: {problem}")
        return frame

    @classmethod
    def write(cls, frame: pd.DataFrame, schema_name: str, path: Union[str, Path]) -> Path:
        """Validate and write a table; returns the path written."""
        cls.validate(frame, schema_name)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(
            path, index=False, sep=",", float_format=FLOAT_FORMAT,
            na_rep="nan", lineterminator="\n", encoding="utf-8",
        )
        return path

