"""
epitrace - Command-Line Entry Point
===================================
Parses a subcommand and its flags into a validated Command and hands it to
the dispatcher, which routes it to the runner owning that subcommand.

Usage:
    PYTHONPATH=. python -m src.main ode-full --dist poisson --mean 25
    PYTHONPATH=. python -m src.main simulate --graph data/dolphins.txt --eta 0.6,0.9 --runs 200
"""

import argparse
import re
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from src.core.dispatcher import Dispatcher
from src.core.errors import UsageError
from src.models.internal import EpidemicParams, IntegrationSettings, PolicyParams
from src.models.output import Command
from src.runners import default_runners
from src.utils.config import DEFAULT_WORKERS, OUTPUT_DIR
from src.utils.logger import main_logger

SUBCOMMANDS = ["ode-full", "ode-reduced", "early-time", "sweep", "stability", "netstat", "gen-graph", "simulate"]

# Model field -> flag, where the two differ beyond dashes
FIELD_FLAGS = {
    "quarantine_period": "--period",
    "count": "--initial-infected",
}

_FLAG_PATTERNS = [
    re.compile(r"argument (\S+?):"),
    re.compile(r"required: (\S+?)(?:,|$)"),
    re.compile(r"unrecognized arguments: (\S+)"),
]


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str):
        flag = None
        for pattern in _FLAG_PATTERNS:
            match = pattern.search(message)
            if match:
                flag = match.group(1).split("/")[0]
                break
        raise UsageError(message, flag=flag)


def _flag_for(field: str) -> str:
    return FIELD_FLAGS.get(field, "--" + field.replace("_", "-"))


def _validate(model: type, values: Dict[str, Any], fallback: Optional[str] = None) -> BaseModel:
    """
    Build a pydantic model from flag values, naming the offending flag on failure.

    fallback names the field blamed for model-level (cross-field) errors.
    """
    try:
        return model(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else fallback
        flag = _flag_for(field) if field else None
        raise UsageError(f"{flag or model.__name__}: {error['msg']}", flag=flag) from e


# =====================================================
# Flag types
# =====================================================

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _int_list(text: str) -> List[int]:
    values = _float_list(text)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in values]


# =====================================================
# Flag groups
# =====================================================

def _add_distribution_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("degree distribution")
    group.add_argument("--dist", choices=["poisson", "powerlaw"], default="poisson")
    group.add_argument("--mean", type=float, default=25.0, help="Poisson mean degree")
    group.add_argument("--exponent", type=float, default=-2.5, help="power-law exponent (negative)")
    group.add_argument("--kmin", type=int, default=1)
    group.add_argument("--kmax", type=int, default=1000, help="truncation degree")


def _add_disease_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("disease and tracing")
    group.add_argument("--alpha", type=float, default=0.4, help="symptomatic probability")
    group.add_argument("--beta", type=float, default=0.15, help="infection rate")
    group.add_argument("--gamma", type=float, default=0.1, help="recovery rate")
    group.add_argument("--gamma1", type=float, default=0.1, help="release rate of isolated susceptibles")
    group.add_argument("--eta", type=float, default=0.5, help="traced fraction of neighbors")


def _add_integration_flags(
    parser: argparse.ArgumentParser, epsilon: float = 1e-3, t_end: float = 150.0
) -> None:
    group = parser.add_argument_group("integration")
    group.add_argument("--epsilon", type=float, default=epsilon, help="initial infected fraction")
    group.add_argument("--t-end", type=float, default=t_end)
    group.add_argument("--sample-dt", type=float, default=0.5, help="output grid spacing")
    group.add_argument("--rtol", type=float, default=1e-6)
    group.add_argument("--atol", type=float, default=1e-9)


def _add_output_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", default=None, help="output path (default: <output dir>/<subcommand>.csv)")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="epitrace",
        description="SIR with asymptomatic cases, contact tracing and isolation on networks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    for name, help_text in [
        ("ode-full", "integrate the full degree-based system"),
        ("ode-reduced", "integrate the reduced system"),
        ("early-time", "early-time closed form for v(t)"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_distribution_flags(p)
        _add_disease_flags(p)
        _add_integration_flags(p)
        if name != "ode-full":
            p.add_argument("--compare", action="store_true", help="also solve the full system and emit ratios")
        _add_output_flag(p)

    p = sub.add_parser("sweep", help="aggregate curves over values of one parameter")
    _add_distribution_flags(p)
    _add_disease_flags(p)
    _add_integration_flags(p)
    p.add_argument("--parameter", required=True, choices=list(EpidemicParams.model_fields))
    p.add_argument("--values", required=True, type=_float_list)
    p.add_argument("--system", choices=["full", "reduced"], default="full")
    _add_output_flag(p)

    p = sub.add_parser("stability", help="linearization and limit bounds at (xi, 0, 0)")
    _add_distribution_flags(p)
    _add_disease_flags(p)
    _add_integration_flags(p, epsilon=1e-4, t_end=200.0)
    p.add_argument("--xi", type=_float_list, default=[0.5], help="comma-separated equilibria")
    p.add_argument("--perturbation", action="store_true", help="tabulate the perturbation solution")
    p.add_argument("--verify", action="store_true", help="check the limit interval numerically")
    _add_output_flag(p)

    p = sub.add_parser("netstat", help="statistics of an edge-list graph")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--h-overlap", type=float, default=None, help="also classify edges at this overlap")
    p.add_argument("--mapping-output", default=None, help="write the node id map here")
    _add_output_flag(p)

    p = sub.add_parser("gen-graph", help="generate a configuration-model graph")
    _add_distribution_flags(p)
    p.add_argument("--nodes", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_output_flag(p)

    p = sub.add_parser("simulate", help="agent-based tracing ensembles")
    p.add_argument("--graph", default=None, help="edge-list file")
    p.add_argument("--nodes", type=_positive_int, default=None, help="generate a configuration model instead")
    p.add_argument("--graph-seed", type=int, default=0)
    _add_distribution_flags(p)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--eta", type=_float_list, default=[0.5])
    p.add_argument("--period", type=_int_list, default=[14], help="isolation periods")
    p.add_argument("--h-overlap", type=_float_list, default=[0.75])
    p.add_argument("--beta-close", type=float, default=0.3)
    p.add_argument("--beta-normal", type=float, default=0.15)
    p.add_argument("--runs", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed + i")
    p.add_argument("--workers", type=_positive_int, default=DEFAULT_WORKERS)
    p.add_argument("--initial-infected", type=int, default=None)
    p.add_argument("--max-steps", type=_positive_int, default=None)
    p.add_argument("--uniform-edges", action="store_true", help="type every edge normal")
    p.add_argument("--timeseries", action="store_true", help="write per-step fractions of the first run")
    p.add_argument("--mapping-output", default=None)
    _add_output_flag(p)
    return parser


def _validate_params(subcommand: str, params: Dict[str, Any]) -> None:
    if subcommand in ("ode-full", "ode-reduced", "early-time", "sweep", "stability"):
        _validate(EpidemicParams, {name: params[name] for name in EpidemicParams.model_fields})
        _validate(IntegrationSettings, {name: params[name] for name in IntegrationSettings.model_fields})
    if subcommand == "stability" and any(not 0.0 < xi <= 1.0 for xi in params["xi"]):
        raise UsageError("--xi: every equilibrium must lie in (0, 1]", flag="--xi")
    if subcommand == "netstat" and params.get("h_overlap") is not None:
        _validate(PolicyParams, {"h_overlap": params["h_overlap"]})
    if subcommand == "simulate":
        _validate(EpidemicParams, {"alpha": params["alpha"], "gamma": params["gamma"]})
        betas = {"beta_close": params["beta_close"], "beta_normal": params["beta_normal"]}
        _validate(PolicyParams, betas, fallback="beta_close")
        for eta in params["eta"]:
            _validate(PolicyParams, {"eta": eta})
        for period in params["period"]:
            _validate(PolicyParams, {"quarantine_period": period})
        for h in params["h_overlap"]:
            _validate(PolicyParams, {"h_overlap": h})
        if params.get("initial_infected") is not None and params["initial_infected"] < 1:
            raise UsageError("--initial-infected must be >= 1", flag="--initial-infected")
        if not params.get("graph") and not params.get("nodes"):
            raise UsageError("either --graph or --nodes is required", flag="--graph")


def parse_args(argv: Optional[Sequence[str]] = None) -> Command:
    """
    Parse argv into a validated Command.

    Raises:
        UsageError: Unknown flag, missing required flag or out-of-range value
    """
    namespace = build_parser().parse_args(argv)
    params = vars(namespace)
    subcommand = params.pop("subcommand")
    output = params.pop("output")
    _validate_params(subcommand, params)
    if output is None:
        suffix = ".txt" if subcommand == "gen-graph" else ".csv"
        output = str(OUTPUT_DIR / f"{subcommand}{suffix}")
    return Command(
        subcommand=subcommand,
        params={key: value for key, value in params.items() if value is not None},
        output=output,
    )


def execute(command: Command) -> int:
    """Run a validated command; returns the process exit code."""
    return Dispatcher(default_runners()).dispatch(command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the epitrace CLI.
    """
    try:
        command = parse_args(argv)
    except UsageError as e:
        main_logger.error(f"usage error: {e}")
        return e.exit_code
    return execute(command)


if __name__ == "__main__":
    sys.exit(main())
