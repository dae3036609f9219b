"""
Command Dispatcher
==================
Routes a validated Command to the runner that owns its subcommand, writes
every produced table through its output schema, and leaves a manifest
sidecar next to the main output.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional, Set

from src import __version__
from src.core.base_runner import BaseRunner, RunOutput
from src.core.errors import EpitraceError, InvariantViolation, UsageError
from src.models.output import Command, RunManifest
from src.templates.csv_schemas import OutputEngine
from src.utils.logger import log_file_saved, log_run_complete, log_run_start, main_logger


class RunnerRegistry:
    """
    Registry of available runners and their capabilities.

    Enables capability-based routing of subcommands.
    """

    def __init__(self):
        self._runners: Dict[str, BaseRunner] = {}
        self._capability_index: Dict[str, Set[str]] = {}  # subcommand -> runner_ids

    def register(self, runner: BaseRunner) -> None:
        """Register a runner with the registry."""
        self._runners[runner.runner_id] = runner
        for capability in runner.capabilities:
            self._capability_index.setdefault(capability.name, set()).add(runner.runner_id)
        main_logger.debug(f"Registered runner: {runner.name} ({runner.runner_id})")

    def find_runner(self, subcommand: str) -> Optional[BaseRunner]:
        """The runner owning a subcommand (lowest id if several do)."""
        runner_ids = sorted(self._capability_index.get(subcommand, set()))
        return self._runners[runner_ids[0]] if runner_ids else None


def table_path(output: Path, suffix: str) -> Path:
    """Main output for an empty suffix, otherwise <stem>_<suffix>.csv beside it."""
    if not suffix:
        return output
    return output.with_name(f"{output.stem}_{suffix}.csv")


def manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest")


class Dispatcher:
    """
    Executes commands by routing them to registered runners.

    Responsibilities:
    1. Find the runner owning the subcommand
    2. Write its declared tables with the output engine
    3. Write the run manifest
    4. Map errors to process exit codes
    """

    def __init__(self, runners: Optional[List[BaseRunner]] = None):
        self.registry = RunnerRegistry()
        for runner in runners or []:
            self.registry.register(runner)

    def _write_tables(self, output: RunOutput, main_path: Path, declared: List[str]) -> List[Path]:
        written = []
        for table in output.tables:
            if table.schema_name not in declared:
                raise InvariantViolation(f"table '{table.schema_name}' is not declared by the subcommand")
            path = OutputEngine.write(table.frame, table.schema_name, table_path(main_path, table.suffix))
            log_file_saved(path)
            written.append(path)
        return written + list(output.files)

    def run(self, command: Command) -> List[Path]:
        """
        Execute a command, raising on failure.

        Returns:
            Paths written, manifest last
        """
        runner = self.registry.find_runner(command.subcommand)
        if runner is None:
            raise UsageError(f"no runner for subcommand '{command.subcommand}'")

        log_run_start(command.subcommand)
        started = time.perf_counter()
        main_path = Path(command.output)
        output = runner.handle(command)
        declared = runner.get_capability(command.subcommand).output_schemas
        written = self._write_tables(output, main_path, declared)
        elapsed = time.perf_counter() - started

        manifest = RunManifest(
            subcommand=command.subcommand,
            params=command.params,
            version=__version__,
            outputs=[p.name for p in written],
            decisions=runner.memory.decision_texts(),
            wall_clock_seconds=elapsed,
        )
        path = manifest_path(main_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(manifest.to_lines()) + "\n")
        log_file_saved(path)
        log_run_complete(command.subcommand, elapsed)
        return written + [path]

    def dispatch(self, command: Command) -> int:
        """Execute a command and return the process exit code."""
        try:
            self.run(command)
        except EpitraceError as e:
            main_logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        return 0
