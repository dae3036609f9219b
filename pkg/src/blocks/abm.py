"""
Agent-Based Simulation
======================
Discrete-time stochastic SIR with asymptomatic spread, contact tracing and
isolation on a typed contact graph.

Each unit step, in order:
1. Transmission from infected (non-isolated) nodes to susceptible neighbors
2. Symptom branching of new infections; symptomatic cases are isolated and
   trace their close contacts plus each normal contact with probability eta
3. Recovery of every infected node, isolated or not
4. Countdown and release of isolated susceptibles. A node isolated with
   period P is recorded as isolated for exactly P steps
"""

from concurrent.futures import ProcessPoolExecutor
from enum import IntEnum
from functools import partial
from itertools import product
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.blocks.netgraph import ContactGraph, EdgeKind, classify_edges
from src.core.errors import ParameterError, SimulationTimeout
from src.models.internal import EpidemicParams, PolicyParams, SeedSpec
from src.models.output import METRICS, EnsembleSummary, SimulationResult
from src.utils.config import DEFAULT_WORKERS
from src.utils.logger import get_component_logger

logger = get_component_logger("abm")

DEFAULT_MAX_STEPS = 100_000


class Compartment(IntEnum):
    S = 0   # susceptible
    I = 1   # infected, asymptomatic, not isolated
    SQ = 2  # susceptible, isolated
    IQ = 3  # infected, isolated
    R = 4   # recovered


SERIES_COLUMNS = [c.name for c in Compartment]


def _transmission_probability(rate: float) -> float:
    return 1.0 - np.exp(-rate)


def _initial_infected(n: int, seeds: SeedSpec, rng: np.random.Generator) -> np.ndarray:
    if seeds.nodes is not None:
        nodes = np.unique(np.asarray(seeds.nodes, dtype=np.int64))
        if len(nodes) and (nodes.min() < 0 or nodes.max() >= n):
            raise ParameterError(f"seed nodes must lie in 0..{n - 1}")
        return nodes
    count = seeds.count if seeds.count is not None else max(1, round(seeds.fraction * n))
    if count > n:
        raise ParameterError(f"cannot seed {count} infections in {n} nodes")
    return rng.choice(n, size=count, replace=False)


def simulate_once(
    g: ContactGraph,
    disease: EpidemicParams,
    policy: PolicyParams,
    seeds: Optional[SeedSpec] = None,
    rng_seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> SimulationResult:
    """
    One stochastic run, until no node is infected or isolated.

    Args:
        g: Contact graph with every edge typed close or normal
        disease: alpha (symptomatic probability) and gamma (recovery rate)
        policy: Tracing policy and per-edge-type transmission rates
        seeds: Initial infections (default: max(1, round(0.001 n)) random nodes)
        rng_seed: Seed of the run's private generator
        max_steps: Step cap

    Returns:
        SimulationResult with per-step compartment fractions and metrics

    Raises:
        ParameterError: Untyped edges
        SimulationTimeout: The run did not finish within max_steps
    """
    if not g.is_typed:
        raise ParameterError("every edge must be typed close or normal before simulation")
    seeds = seeds or SeedSpec()
    rng = np.random.default_rng(rng_seed)
    n = g.n

    sources = np.repeat(np.arange(n), g.degrees)
    targets = g.indices
    close = g.entry_kinds() == EdgeKind.CLOSE.code
    p_edge = np.where(
        close,
        _transmission_probability(policy.beta_close),
        _transmission_probability(policy.beta_normal),
    )
    p_recover = _transmission_probability(disease.gamma)

    state = np.full(n, Compartment.S, dtype=np.int8)
    clock = np.zeros(n, dtype=np.int64)
    newly_isolated = np.zeros(n, dtype=bool)
    state[_initial_infected(n, seeds, rng)] = Compartment.I

    counts = [np.bincount(state, minlength=5)]
    step = 0
    while np.any((state == Compartment.I) | (state == Compartment.IQ) | (state == Compartment.SQ)):
        step += 1
        newly_isolated[:] = False
        if step > max_steps:
            raise SimulationTimeout(f"run with seed {rng_seed} still active after {max_steps} steps")

        # 1. transmission: only non-isolated infected to non-isolated susceptible
        candidates = np.flatnonzero((state[sources] == Compartment.I) & (state[targets] == Compartment.S))
        hits = candidates[rng.random(len(candidates)) < p_edge[candidates]]
        infected = np.unique(targets[hits])

        # 2. symptom branching and tracing
        symptomatic = rng.random(len(infected)) < disease.alpha
        state[infected[~symptomatic]] = Compartment.I
        index_cases = infected[symptomatic]
        state[index_cases] = Compartment.IQ
        if len(index_cases):
            is_index = np.zeros(n, dtype=bool)
            is_index[index_cases] = True
            contacts = np.flatnonzero(is_index[sources])
            traced = close[contacts] | (rng.random(len(contacts)) < policy.eta)
            traced_nodes = np.unique(targets[contacts[traced]])
            to_isolate = traced_nodes[state[traced_nodes] == Compartment.S]
            state[to_isolate] = Compartment.SQ
            clock[to_isolate] = policy.quarantine_period
            newly_isolated[to_isolate] = True
            caught = traced_nodes[state[traced_nodes] == Compartment.I]
            state[caught] = Compartment.IQ

        # 3. recovery
        sick = np.flatnonzero((state == Compartment.I) | (state == Compartment.IQ))
        state[sick[rng.random(len(sick)) < p_recover]] = Compartment.R

        # 4. release of isolated susceptibles; the clock starts counting next step
        isolated = np.flatnonzero(state == Compartment.SQ)
        clock[isolated[~newly_isolated[isolated]]] -= 1
        released = isolated[clock[isolated] <= 0]
        state[released] = Compartment.S
        clock[released] = 0

        counts.append(np.bincount(state, minlength=5))

    counts = np.array(counts)
    series = counts / n
    quarantined = counts[:, Compartment.SQ] + counts[:, Compartment.IQ]
    infected_total = counts[:, Compartment.I] + counts[:, Compartment.IQ]

    def _cleared_at(count: np.ndarray) -> int:
        active = np.flatnonzero(count > 0)
        return int(active[-1] + 1) if len(active) else 0

    final = counts[-1]
    result = SimulationResult(
        series=series,
        S=float((final[Compartment.S] + final[Compartment.SQ]) / n),
        R=float(final[Compartment.R] / n),
        Q_max=float(series[:, Compartment.SQ].max()),
        QI_max=float(series[:, Compartment.IQ].max()),
        I_max=float(series[:, Compartment.I].max()),
        t_q=_cleared_at(quarantined),
        t_i=_cleared_at(infected_total),
        steps=step,
        seed=rng_seed,
        disease=disease,
        policy=policy,
    )
    logger.debug(f"seed {rng_seed}: {step} steps, S={result.S:.4f}, R={result.R:.4f}")
    return result


def _run_indexed(
    index: int,
    g: ContactGraph,
    disease: EpidemicParams,
    policy: PolicyParams,
    seeds: Optional[SeedSpec],
    base_seed: int,
    max_steps: int,
) -> SimulationResult:
    return simulate_once(g, disease, policy, seeds, base_seed + index, max_steps)


def summarize(runs: List[SimulationResult], base_seed: int, policy: PolicyParams) -> EnsembleSummary:
    """Per-metric mean and standard deviation (ddof=1 for two or more runs)."""
    table = pd.DataFrame([run.metrics() for run in runs], columns=METRICS)
    ddof = 1 if len(runs) > 1 else 0
    return EnsembleSummary(
        base_seed=base_seed,
        n_runs=len(runs),
        mean={name: float(table[name].mean()) for name in METRICS},
        std={name: float(table[name].std(ddof=ddof)) for name in METRICS},
        runs=runs,
        policy=policy,
    )


def simulate_ensemble(
    g: ContactGraph,
    disease: EpidemicParams,
    policy: PolicyParams,
    seeds: Optional[SeedSpec] = None,
    n_runs: int = 1,
    base_seed: int = 0,
    workers: int = DEFAULT_WORKERS,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> EnsembleSummary:
    """
    n_runs independent runs seeded base_seed + i, summarized in run order.

    With workers > 1 the runs execute in a process pool; results do not
    depend on the worker count.
    """
    if n_runs < 1:
        raise ParameterError(f"n_runs must be >= 1, got {n_runs}")
    job = partial(
        _run_indexed, g=g, disease=disease, policy=policy,
        seeds=seeds, base_seed=base_seed, max_steps=max_steps,
    )
    if workers <= 1 or n_runs == 1:
        runs = [job(i) for i in range(n_runs)]
    else:
        logger.info(f"Running {n_runs} simulations with {workers} workers...")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            runs = list(executor.map(job, range(n_runs), chunksize=max(1, n_runs // (4 * workers))))

    summary = summarize(runs, base_seed, policy)
    logger.info(
        f"eta={policy.eta}, period={policy.quarantine_period}, h={policy.h_overlap}: "
        f"S={summary.mean['S']:.4f}±{summary.std['S']:.4f} over {n_runs} runs"
    )
    return summary


def policy_grid(
    g: ContactGraph,
    disease: EpidemicParams,
    policy: PolicyParams,
    etas: Sequence[float],
    periods: Sequence[int],
    h_overlaps: Sequence[float],
    seeds: Optional[SeedSpec] = None,
    n_runs: int = 1,
    base_seed: int = 0,
    workers: int = DEFAULT_WORKERS,
    max_steps: int = DEFAULT_MAX_STEPS,
    edge_kind: Optional[EdgeKind] = None,
) -> List[EnsembleSummary]:
    """
    Ensembles over every (h_overlap, eta, quarantine_period) combination.

    Edges are retyped once per h_overlap, or given edge_kind uniformly when
    set. Every arm reuses base_seed so arms differ only by policy.
    """
    if not (etas and periods and h_overlaps):
        raise ParameterError("policy grid needs at least one eta, period and h_overlap")
    summaries = []
    for h in h_overlaps:
        typed = g.with_kind(edge_kind) if edge_kind is not None else classify_edges(g, h)
        for eta, period in product(etas, periods):
            arm = policy.replace(eta=eta, quarantine_period=period, h_overlap=h)
            summaries.append(
                simulate_ensemble(typed, disease, arm, seeds, n_runs, base_seed, workers, max_steps)
            )
    return summaries
