"""
Error Hierarchy
===============
Every failure raised by the logic blocks derives from EpitraceError and
carries the process exit code the CLI reports for it.
"""

from typing import Optional


class EpitraceError(Exception):
    """Base class for all epitrace errors."""

    exit_code = 1


class UsageError(EpitraceError, ValueError):
    """Invalid command line: unknown flag, missing flag or bad value."""

    exit_code = 2

    def __init__(self, message: str, flag: Optional[str] = None):
        super().__init__(message)
        self.flag = flag


class ParameterError(EpitraceError, ValueError):
    """A parameter lies outside the domain an operation accepts."""

    exit_code = 2


class DomainError(ParameterError):
    """An argument lies outside the range of a function (e.g. PGF inversion)."""


class DataError(EpitraceError):
    """Input data could not be used."""

    exit_code = 3


class EdgeListParseError(DataError):
    """A line of an edge-list file is malformed."""

    def __init__(self, path: str, line_no: int, line: str):
        super().__init__(f"{path}:{line_no}: cannot parse edge from {line!r}")
        self.path = path
        self.line_no = line_no


class EmptyInputError(DataError):
    """An input file holds no usable records."""


class NumericalError(EpitraceError):
    """A numerical procedure failed or left its domain of validity."""

    exit_code = 4


class StiffnessError(NumericalError):
    """The adaptive integrator could not advance (step size underflow)."""

    def __init__(self, time: float, message: str = ""):
        super().__init__(f"integration failed at t={time:.6g}: {message}".rstrip(": "))
        self.time = time


class SingularityError(NumericalError):
    """A denominator of the reduced system vanished."""


class DegeneracyError(NumericalError):
    """A closed form is undefined at these parameters (e.g. c2 = 0, a = 0)."""


class InvariantViolation(NumericalError):
    """A state left the box [-tol, 1 + tol]."""


class GenerationError(NumericalError):
    """A random graph could not be generated."""


class SimulationTimeout(EpitraceError):
    """A stochastic run exceeded its step cap."""

    exit_code = 5
