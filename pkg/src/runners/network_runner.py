"""
Network Runner
==============
Contact-graph subcommands: statistics of an edge list (with optional edge
typing and node id mapping) and configuration-model generation.
"""

from pathlib import Path
from typing import Any, Dict

import pandas as pd

from src.blocks.netgraph import (
    classify_edges,
    configuration_model,
    edge_frame,
    graph_stats,
    load_edge_list,
    node_mapping_frame,
    write_edge_list,
)
from src.core.base_runner import BaseRunner, RunnerCapability, RunOutput
from src.models.output import Command
from src.runners.inputs import build_distributions
from src.templates.csv_schemas import OutputEngine
from src.utils.logger import log_file_saved


class NetworkRunner(BaseRunner):
    """
    Runner for contact graphs.

    Capabilities:
    - netstat: n, m, K0, rho, C, C_local of an edge list
    - gen-graph: configuration-model edge list
    """

    def __init__(self):
        super().__init__(
            runner_id="network_runner",
            name="Network Runner",
            description="Contact-graph statistics and generation",
            capabilities=[
                RunnerCapability(
                    name="netstat",
                    description="Statistics of an edge-list graph",
                    output_schemas=["netstat", "edges", "mapping"],
                ),
                RunnerCapability(
                    name="gen-graph",
                    description="Generate a configuration-model graph",
                    output_schemas=[],
                ),
            ],
        )

    def plan(self, command: Command) -> Dict[str, Any]:
        p = command.params
        if command.subcommand == "netstat":
            return {"graph": load_edge_list(p["graph"])}
        deg, _ = build_distributions(p, self)
        return {"deg": deg, "n": p["nodes"], "seed": p["seed"]}

    def execute(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        if command.subcommand == "netstat":
            return self._netstat(plan["graph"], command)
        return self._gen_graph(plan, command)

    def write_mapping(self, graph, path: str, output: RunOutput) -> None:
        written = OutputEngine.write(node_mapping_frame(graph), "mapping", path)
        log_file_saved(written)
        output.files.append(Path(written))

    def _netstat(self, g, command: Command) -> RunOutput:
        p = command.params
        if g.dropped.get("duplicates") or g.dropped.get("self_loops"):
            self.decide(
                f"dropped {g.dropped['duplicates']} duplicate edge(s) and {g.dropped['self_loops']} self-loop(s)"
            )
        stats = graph_stats(g)
        self.decide(f"C (transitivity)={stats.C:.6f}, C_local (mean local clustering)={stats.C_local:.6f}")

        output = RunOutput()
        output.add_table("netstat", pd.DataFrame([stats.model_dump()]))
        if p.get("h_overlap") is not None:
            typed = classify_edges(g, p["h_overlap"])
            self.decide(f"h_overlap={p['h_overlap']}: {typed.kind_counts()['close']} close, "
                        f"{typed.kind_counts()['normal']} normal edges")
            output.add_table("edges", edge_frame(typed), suffix="edges")
        if p.get("mapping_output"):
            self.write_mapping(g, p["mapping_output"], output)
        return output

    def _gen_graph(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        g = configuration_model(plan["deg"], plan["n"], plan["seed"])
        self.decide(
            f"m={g.m}, erased {g.dropped['self_loops']} self-loop(s) and {g.dropped['duplicates']} multi-edge(s)"
        )
        path = write_edge_list(g, command.output)
        log_file_saved(path)
        return RunOutput(files=[path])
