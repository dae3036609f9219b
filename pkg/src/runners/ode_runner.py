"""
ODE Runner
==========
Carries out the deterministic subcommands: full and reduced system
solves, the early-time closed form and parameter sweeps.
"""

from typing import Any, Dict

import numpy as np
import pandas as pd

from src.blocks import kinetics
from src.core.base_runner import BaseRunner, RunnerCapability, RunOutput
from src.models.output import Command
from src.runners.inputs import build_disease, build_distributions


class OdeRunner(BaseRunner):
    """
    Runner for the degree-based ODE systems.

    Capabilities:
    - ode-full: full system, node-weighted compartments
    - ode-reduced: reduced system, optionally with reduced/full ratios
    - early-time: logistic closed form, optionally against the full system
    - sweep: aggregate curves over values of one parameter
    """

    def __init__(self):
        super().__init__(
            runner_id="ode_runner",
            name="ODE Runner",
            description="Integrates the full and reduced compartmental systems",
            capabilities=[
                RunnerCapability(
                    name="ode-full",
                    description="Integrate the full degree-based system",
                    output_schemas=["compartments"],
                ),
                RunnerCapability(
                    name="ode-reduced",
                    description="Integrate the reduced system",
                    output_schemas=["reduced", "ratio"],
                ),
                RunnerCapability(
                    name="early-time",
                    description="Evaluate the early-time closed form",
                    output_schemas=["early_time", "early_time_compare"],
                ),
                RunnerCapability(
                    name="sweep",
                    description="Sweep one disease or policy parameter",
                    output_schemas=["sweep"],
                ),
            ],
        )

    def plan(self, command: Command) -> Dict[str, Any]:
        p = command.params
        deg, exc = build_distributions(p, self)
        disease = build_disease(p)
        if disease.gamma > 0:
            self.decide(f"R0={kinetics.basic_reproduction_number(disease, exc):.10g}")
        return {
            "params": disease,
            "deg": deg,
            "exc": exc,
            "epsilon": p["epsilon"],
            "t_end": p["t_end"],
            "sample_dt": p["sample_dt"],
            "rtol": p["rtol"],
            "atol": p["atol"],
        }

    def execute(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        handlers = {
            "ode-full": self._ode_full,
            "ode-reduced": self._ode_reduced,
            "early-time": self._early_time,
            "sweep": self._sweep,
        }
        return handlers[command.subcommand](plan, command)

    def _ode_full(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        traj = kinetics.solve_full(**plan)
        self.decide(f"max conservation error {kinetics.conservation_error(traj):.3e}")
        aggregate = kinetics.aggregate_full(traj, plan["deg"])
        self.decide(f"final size r={kinetics.final_size(aggregate)['r_final']:.10g}")
        output = RunOutput()
        output.add_table("compartments", aggregate.to_frame())
        return output

    def _ode_reduced(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        traj = kinetics.solve_reduced(**plan)
        self.decide(f"u(0)={traj.values[0, 0]:.12g}")
        output = RunOutput()
        output.add_table("reduced", traj.to_frame())
        if command.params.get("compare"):
            approx, exact = kinetics.compare_reduced_full(**plan)
            ratio = kinetics.ratio_series(approx, exact)
            worst = np.nanmax(np.abs(ratio.values - 1.0), axis=0)
            self.decide(
                "largest |ratio - 1| per compartment: "
                + ", ".join(f"{name}={value:.4g}" for name, value in zip(ratio.columns, worst))
            )
            output.add_table("ratio", ratio.to_frame(), suffix="ratio")
        return output

    def _early_time(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        model = kinetics.early_time_model(plan["params"], plan["deg"], plan["exc"], plan["epsilon"])
        self.decide(f"c1={model.c1:.10g}, c2={model.c2:.10g}, D1={model.D1:.10g}")
        output = RunOutput()
        if command.params.get("compare"):
            traj = kinetics.compare_early_time(**plan)
            output.add_table("early_time_compare", traj.to_frame())
        else:
            times = kinetics.sample_grid(plan["t_end"], plan["sample_dt"])
            output.add_table("early_time", pd.DataFrame({"t": times, "v_early": model.value(times)}))
        return output

    def _sweep(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        parameter = command.params["parameter"]
        results = kinetics.parameter_sweep(
            parameter, command.params["values"], system=command.params["system"], **plan
        )
        frames = []
        for value, traj in results:
            frame = traj.to_frame()
            frame.insert(0, "value", value)
            frame.insert(0, "parameter", parameter)
            frames.append(frame)
        output = RunOutput()
        output.add_table("sweep", pd.concat(frames, ignore_index=True))
        return output
