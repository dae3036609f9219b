"""
Logging Module for epitrace
===========================
Structured logging with console and (optional) file output.
File logs go to '<EPITRACE_LOG_DIR>/system.log'.
"""

import copy
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from src.utils.config import LOG_DIR, LOG_LEVEL

LOG_FILE: Optional[Path] = Path(LOG_DIR) / "system.log" if LOG_DIR else None

IS_WINDOWS = os.name == 'nt'


class SafeStreamHandler(logging.StreamHandler):
    """Stream handler that survives consoles without UTF-8 support."""

    def emit(self, record):
        try:
            msg = self.format(record)
            if IS_WINDOWS:
                msg = msg.replace('✓', '[OK]').replace('✗', '[FAIL]')
                msg = msg.replace('→', '->').replace('≥', '>=')
            self.stream.write(msg + self.terminator)
            self.flush()
        except Exception:
            self.handleError(record)


class ColoredFormatter(logging.Formatter):
    """Console formatter that colors the level name."""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record):
        # The record is shared with the file handler, so color a copy
        record = copy.copy(record)
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        record.levelname = f"{color}{record.levelname}{self.COLORS['RESET']}"
        return super().format(record)


def setup_logger(name: str = "epitrace") -> logging.Logger:
    """
    Sets up a logger with console and file handlers.

    Args:
        name: Logger name (default: "epitrace")

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    if LOG_FILE is not None:
        LOG_FILE.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(LOG_FILE, mode='a', encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            fmt='%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)

    console_handler = SafeStreamHandler(sys.stdout)
    console_handler.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    console_handler.setFormatter(ColoredFormatter(fmt='%(levelname)s | %(message)s'))
    logger.addHandler(console_handler)

    return logger


def get_component_logger(component: str) -> logging.Logger:
    """
    Get a logger for a named component (logic block or runner).

    Args:
        component: Component name, e.g. "kinetics" or "SimulationRunner"

    Returns:
        Logger instance named 'epitrace.<component>'
    """
    return setup_logger(f"epitrace.{component}")


main_logger = setup_logger("epitrace.main")


def log_run_start(subcommand: str):
    """Log the start of a CLI run."""
    main_logger.info("=" * 60)
    main_logger.info(f"EPITRACE - {subcommand} started")
    main_logger.info(f"Timestamp: {datetime.now().isoformat()}")
    main_logger.info("=" * 60)


def log_run_complete(subcommand: str, seconds: float):
    """Log the completion of a CLI run."""
    main_logger.info("=" * 60)
    main_logger.info(f"{subcommand} complete in {seconds:.2f}s")
    if LOG_FILE is not None:
        main_logger.info(f"Logs saved to: {LOG_FILE.absolute()}")
    main_logger.info("=" * 60)


def log_file_saved(filepath):
    """Log when a file is saved."""
    main_logger.info(f"✓ Saved: {filepath}")
