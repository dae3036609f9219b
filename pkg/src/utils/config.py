"""
Runtime Configuration
=====================
Environment-driven settings, loaded from a `.env` file when present.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Directory for system.log; an empty value disables file logging
LOG_DIR = os.getenv("EPITRACE_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("EPITRACE_LOG_LEVEL", "INFO").upper()

OUTPUT_DIR = Path(os.getenv("EPITRACE_OUTPUT_DIR", "output"))

# Process count for ensemble simulations (1 = run in-process)
DEFAULT_WORKERS = int(os.getenv("EPITRACE_WORKERS", "1"))

# Optional location of the dolphin edge list used by dataset checks
DOLPHIN_PATH = Path(os.getenv("EPITRACE_DOLPHIN_PATH", "data/dolphins.txt"))
