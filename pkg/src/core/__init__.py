"""
Core Runner Framework
=====================
Provides the runner base class, the dispatcher that routes subcommands to
runners, and the error hierarchy shared by every block.
"""

from .base_runner import BaseRunner, RunnerCapability, RunnerState, RunOutput
from .dispatcher import Dispatcher, RunnerRegistry
from .errors import EpitraceError, UsageError

__all__ = [
    'BaseRunner',
    'RunnerCapability',
    'RunnerState',
    'RunOutput',
    'Dispatcher',
    'RunnerRegistry',
    'EpitraceError',
    'UsageError',
]
