"""
Stability Runner
================
Linearizes the reduced system at one or more equilibria (xi, 0, 0) and,
on request, tabulates the perturbation solution and checks the limit
interval against a numerical solve.
"""

import math
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from src.blocks.kinetics import sample_grid
from src.blocks.stability import linearize, perturbation_solution, verify_against_ode
from src.core.base_runner import BaseRunner, RunnerCapability, RunOutput
from src.models.output import Command, StabilityClass, StabilityReport
from src.runners.inputs import build_disease, build_distributions


def report_row(report: StabilityReport) -> Dict[str, Any]:
    row = {
        "xi": report.xi,
        "a": report.a,
        "classification": report.classification.value,
    }
    for name in ("A", "B", "h_coef", "d1", "d2", "d3", "d4", "M", "m", "L", "U"):
        row[name] = getattr(report, name)
    for i, values in enumerate(report.jacobian, start=1):
        for j, value in enumerate(values, start=1):
            row[f"J{i}{j}"] = value
    return row


class StabilityRunner(BaseRunner):
    """Runner for the stability subcommand."""

    def __init__(self):
        super().__init__(
            runner_id="stability_runner",
            name="Stability Runner",
            description="Linearization and limit bounds of the reduced system",
            capabilities=[
                RunnerCapability(
                    name="stability",
                    description="Stability report at equilibria (xi, 0, 0)",
                    output_schemas=["stability", "perturbation", "stability_check"],
                )
            ],
        )

    def plan(self, command: Command) -> Dict[str, Any]:
        deg, exc = build_distributions(command.params, self)
        return {"params": build_disease(command.params), "deg": deg, "exc": exc}

    def execute(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        p = command.params
        epsilon, t_end, sample_dt = p["epsilon"], p["t_end"], p["sample_dt"]
        reports: List[StabilityReport] = [
            linearize(xi, plan["params"], plan["deg"], plan["exc"]) for xi in p["xi"]
        ]
        for report in reports:
            self.decide(f"xi={report.xi:g}: a={report.a:.10g} ({report.classification.value})")

        output = RunOutput()
        output.add_table("stability", pd.DataFrame([report_row(r) for r in reports]))
        active = [r for r in reports if r.classification != StabilityClass.DEGENERATE]
        if len(active) < len(reports):
            self.decide("degenerate equilibria skipped for perturbation and verification")

        if p.get("perturbation"):
            frames = []
            for report in active:
                horizon = t_end
                if report.a > 0:
                    # linearization is meaningless once eps e^{a t} reaches order one
                    horizon = min(t_end, math.log(1 / epsilon) / report.a)
                    self.decide(f"xi={report.xi:g}: perturbation sampled up to t={horizon:.6g}")
                times = sample_grid(horizon, sample_dt)
                samples = perturbation_solution(report, epsilon).sample(times)
                frames.append(pd.DataFrame({
                    "xi": report.xi, "t": times,
                    "y1": samples[:, 0], "y2": samples[:, 1], "y3": samples[:, 2],
                }))
            if frames:
                output.add_table("perturbation", pd.concat(frames, ignore_index=True), suffix="perturbation")

        if p.get("verify"):
            rows = []
            for report in active:
                check = verify_against_ode(report, epsilon, t_end, plan["deg"], plan["exc"])
                row = check.model_dump()
                row["escape_time"] = np.nan if check.escape_time is None else check.escape_time
                rows.append(row)
            if rows:
                output.add_table("stability_check", pd.DataFrame(rows), suffix="check")
        return output
