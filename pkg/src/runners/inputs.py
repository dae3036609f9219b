"""
Command Inputs
==============
Builds the block inputs shared by several runners from a command's
parameter bag.
"""

from typing import Any, Dict, Tuple

from src.blocks.dist import DegreeDistribution, excess_of, make_distribution
from src.blocks.netgraph import ContactGraph, configuration_model, load_edge_list
from src.core.base_runner import BaseRunner
from src.core.errors import UsageError
from src.models.internal import EpidemicParams


def build_distributions(params: Dict[str, Any], runner: BaseRunner) -> Tuple[DegreeDistribution, DegreeDistribution]:
    """Degree distribution from --dist/--mean/--exponent/--kmin/--kmax and its excess."""
    deg = make_distribution(
        params["dist"],
        mean=params.get("mean", 25.0),
        exponent=params.get("exponent", -2.5),
        kmin=params.get("kmin", 1),
        kmax=params.get("kmax", 1000),
    )
    exc = excess_of(deg)
    runner.decide(f"degree distribution {deg.label}: K0={deg.mean():.10g}, K1={exc.mean():.10g}")
    return deg, exc


def build_disease(params: Dict[str, Any]) -> EpidemicParams:
    fields = {name: params[name] for name in EpidemicParams.model_fields if params.get(name) is not None}
    return EpidemicParams(**fields)


def build_graph(params: Dict[str, Any], runner: BaseRunner) -> ContactGraph:
    """Graph from --graph, or a configuration model from --nodes and the distribution flags."""
    if params.get("graph"):
        g = load_edge_list(params["graph"])
        if g.dropped.get("duplicates") or g.dropped.get("self_loops"):
            runner.decide(
                f"dropped {g.dropped['duplicates']} duplicate edge(s) and {g.dropped['self_loops']} self-loop(s)"
            )
        return g
    if params.get("nodes"):
        deg, _ = build_distributions(params, runner)
        g = configuration_model(deg, params["nodes"], params.get("graph_seed", 0))
        runner.decide(f"generated configuration model n={g.n}, m={g.m}, seed={params.get('graph_seed', 0)}")
        return g
    raise UsageError("either --graph or --nodes is required", flag="--graph")
