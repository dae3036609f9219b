"""
Base Runner Framework
=====================
Provides the foundational class for the runners that carry out CLI
subcommands: identity, declared capabilities, a state machine and a memory
of the decisions taken along the way.
"""

from abc import ABC, abstractmethod
from datetime import datetime
from enum import Enum, auto
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import EpitraceError, UsageError
from src.models.output import Command
from src.utils.logger import get_component_logger


class RunnerState(Enum):
    """Possible states of a runner."""

    IDLE = auto()           # Ready to accept a command
    PLANNING = auto()       # Building inputs from the command parameters
    EXECUTING = auto()      # Running the numerical blocks
    COMPLETED = auto()      # Command finished successfully
    FAILED = auto()         # Command raised an error


class RunnerCapability(BaseModel):
    """A subcommand a runner can carry out, and the tables it produces."""

    name: str
    description: str
    output_schemas: List[str] = Field(default_factory=list)


class RunnerMemory(BaseModel):
    """
    Decisions recorded while handling a command.

    Decision texts are deterministic so they can be echoed into the run
    manifest; timestamps stay in memory only.
    """

    decisions: List[Dict[str, Any]] = Field(default_factory=list)

    def record_decision(self, decision: str, reasoning: str = "") -> None:
        """Record a decision made while planning or executing."""
        self.decisions.append({
            "decision": decision,
            "reasoning": reasoning,
            "timestamp": datetime.now().isoformat(),
        })

    def decision_texts(self) -> List[str]:
        return [d["decision"] for d in self.decisions]

    def clear(self) -> None:
        self.decisions.clear()


class TableOutput(BaseModel):
    """One table to write: the main output when suffix is empty, else <stem>_<suffix>.csv."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    schema_name: str
    frame: pd.DataFrame
    suffix: str = ""


class RunOutput(BaseModel):
    """Everything a runner produced for one command."""

    tables: List[TableOutput] = Field(default_factory=list)
    files: List[Path] = Field(default_factory=list, description="Files the runner wrote itself")

    def add_table(self, schema_name: str, frame: pd.DataFrame, suffix: str = "") -> None:
        self.tables.append(TableOutput(schema_name=schema_name, frame=frame, suffix=suffix))


class BaseRunner(ABC):
    """
    Abstract base class for subcommand runners.

    A runner:
    1. Declares the subcommands it owns as capabilities
    2. Turns a validated Command into block inputs (plan)
    3. Calls the numerical blocks and returns tables (execute)
    4. Records its decisions for the run manifest

    Subclasses implement plan() and execute().
    """

    def __init__(
        self,
        runner_id: str,
        name: str,
        description: str,
        capabilities: Optional[List[RunnerCapability]] = None,
    ):
        self.runner_id = runner_id
        self.name = name
        self.description = description
        self.capabilities = capabilities or []

        self._state = RunnerState.IDLE
        self.memory = RunnerMemory()

        self.logger = get_component_logger(runner_id)
        self.logger.debug(f"Runner '{name}' initialized with capabilities: {self.get_capability_names()}")

    @property
    def state(self) -> RunnerState:
        """Current state of the runner."""
        return self._state

    @state.setter
    def state(self, new_state: RunnerState) -> None:
        """Update runner state with logging."""
        old_state = self._state
        self._state = new_state
        self.logger.debug(f"State transition: {old_state.name} -> {new_state.name}")

    def get_capability_names(self) -> List[str]:
        """Get list of subcommands this runner owns."""
        return [cap.name for cap in self.capabilities]

    def get_capability(self, subcommand: str) -> RunnerCapability:
        for cap in self.capabilities:
            if cap.name == subcommand:
                return cap
        raise UsageError(f"runner '{self.runner_id}' does not handle '{subcommand}'")

    def decide(self, decision: str, reasoning: str = "") -> None:
        """Record and log a decision."""
        self.memory.record_decision(decision, reasoning)
        self.logger.info(f"→ {decision}")
        if reasoning:
            self.logger.debug(f"   - reasoning: {reasoning}")

    def handle(self, command: Command) -> RunOutput:
        """
        Plan and execute a command.

        Args:
            command: Validated command owned by this runner

        Returns:
            The tables and files produced

        Raises:
            EpitraceError: Propagated after the runner is marked FAILED
        """
        self.memory.clear()
        try:
            self.state = RunnerState.PLANNING
            plan = self.plan(command)
            self.state = RunnerState.EXECUTING
            output = self.execute(plan, command)
        except EpitraceError as e:
            self.state = RunnerState.FAILED
            self.logger.error(f"{command.subcommand} failed: {e}")
            raise
        self.state = RunnerState.COMPLETED
        self.logger.debug(f"{command.subcommand} produced {len(output.tables)} table(s)")
        return output

    # =====================================================
    # Abstract methods - Must be implemented by subclasses
    # =====================================================

    @abstractmethod
    def plan(self, command: Command) -> Dict[str, Any]:
        """
        Build the block inputs (distributions, parameter models, graphs)
        from the command parameters.

        Args:
            command: The command to plan for

        Returns:
            Keyword inputs for execute()
        """

    @abstractmethod
    def execute(self, plan: Dict[str, Any], command: Command) -> RunOutput:
        """
        Run the numerical blocks on the planned inputs.

        Args:
            plan: Output of plan()
            command: The command being handled

        Returns:
            Tables and files produced
        """
