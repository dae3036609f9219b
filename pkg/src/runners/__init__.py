"""
Subcommand Runners
==================
One runner per family of CLI subcommands.
"""

from .network_runner import NetworkRunner
from .ode_runner import OdeRunner
from .simulation_runner import SimulationRunner
from .stability_runner import StabilityRunner

__all__ = ['OdeRunner', 'StabilityRunner', 'NetworkRunner', 'SimulationRunner']


def default_runners():
    """Fresh instances of every runner."""
    return [OdeRunner(), StabilityRunner(), NetworkRunner(), SimulationRunner()]
