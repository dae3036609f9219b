# tests/test_output.py
import numpy as np
import pandas as pd
import pytest

from src.core.base_runner import BaseRunner, RunnerCapability, RunnerState, RunOutput
from src.core.dispatcher import Dispatcher
from src.core.errors import ParameterError
from src.models.output import Command
from src.templates.csv_schemas import OutputEngine


def _netstat_frame(**overrides):
    row = {"n": 62, "m": 159, "K0": 5.13, "rho": -0.04, "C": 0.26, "C_local": 0.3}
    row.update(overrides)
    return pd.DataFrame([row])


class TableRunner(BaseRunner):
    """Returns whatever tables it was built with."""

    def __init__(self, tables, declared=("early_time",), error=None):
        super().__init__(
            "table_runner", "Table Runner", "Returns fixed tables",
            [RunnerCapability(name="early-time", description="fixed", output_schemas=list(declared))],
        )
        self.tables = tables
        self.error = error

    def plan(self, command):
        return {}

    def execute(self, plan, command):
        if self.error:
            raise self.error
        output = RunOutput()
        for schema_name, frame, suffix in self.tables:
            output.add_table(schema_name, frame, suffix=suffix)
        return output


def _early_time():
    return pd.DataFrame({"t": [0.0, 1.0], "v_early": [1e-3, 2e-3]})


def _command(tmp_path):
    return Command(subcommand="early-time", params={}, output=str(tmp_path / "out.csv"))


def test_validate_accepts_typed_frame():
    frame = _netstat_frame()
    assert OutputEngine.validate(frame, "netstat") is frame


@pytest.mark.parametrize("schema_name, frame", [
    ("netstat", _netstat_frame(n=62.0)),
    ("netstat", _netstat_frame(K0="5.13")),
    ("mapping", pd.DataFrame({"node": [0, 1], "label": ["a", "b"]})),
    ("stability_check", None),
])
def test_validate_rejects_wrong_dtype(schema_name, frame):
    if frame is None:
        schema = OutputEngine.get_schema(schema_name)
        frame = pd.DataFrame({name: [0.5] for name in schema.header})
    with pytest.raises(ParameterError):
        OutputEngine.validate(frame, schema_name)


def test_declared_table_is_written(tmp_path):
    runner = TableRunner([("early_time", _early_time(), "")])
    assert Dispatcher([runner]).dispatch(_command(tmp_path)) == 0
    assert runner.state == RunnerState.COMPLETED
    np.testing.assert_allclose(pd.read_csv(tmp_path / "out.csv")["v_early"], [1e-3, 2e-3])
    assert (tmp_path / "out.csv.manifest").exists()


def test_undeclared_table_fails_the_run(tmp_path):
    runner = TableRunner([("netstat", _netstat_frame(), "stats"), ("early_time", _early_time(), "")])
    assert Dispatcher([runner]).dispatch(_command(tmp_path)) == 4
    assert not (tmp_path / "out_stats.csv").exists()
    assert not (tmp_path / "out.csv.manifest").exists()


def test_failed_execution_marks_runner(tmp_path):
    runner = TableRunner([], error=ParameterError("bad value"))
    assert Dispatcher([runner]).dispatch(_command(tmp_path)) == 2
    assert runner.state == RunnerState.FAILED
    assert runner.get_capability("early-time").output_schemas == ["early_time"]
