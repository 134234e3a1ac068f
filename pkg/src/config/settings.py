"""
Project settings and configuration.
Loads environment variables from the .env file and exposes shared constants to other modules.
"""
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Base paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent
ENV_PATH = BASE_DIR / ".env"

load_dotenv(ENV_PATH)

# Output and log directories
LOGS_DIR = Path(os.getenv("MOLOPT_LOG_DIR", str(BASE_DIR / "logs")))
OUTPUT_DIR = Path(os.getenv("MOLOPT_OUTPUT_DIR", str(BASE_DIR / "out")))

LOG_LEVEL = os.getenv("MOLOPT_LOG_LEVEL", "INFO").upper()
KNOWN_LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")

# Number of worker processes for sweeps (1 = sequential)
DEFAULT_WORKERS = os.getenv("MOLOPT_WORKERS", "1")

TOOL_VERSION = "0.1.0"

# Dense linear algebra
PIVOT_RELATIVE_THRESHOLD = 1e-14
SOLVE_MAX_DIM = 12

# Durand-Kerner root finder
ROOTS_MAX_ITERATIONS = 500
ROOTS_STEP_TOLERANCE = 1e-12
ROOTS_RESIDUAL_TOLERANCE = 1e-8

# Self-consistent steady state
FIXED_POINT_DAMPING = 0.5
FIXED_POINT_TOLERANCE = 1e-12
FIXED_POINT_MAX_ITERATIONS = 10_000
STEADY_STATE_RESIDUAL_TOLERANCE = 1e-10
STATIC_LIMIT_TOLERANCE = 1e-12

# Linearization validity: warn when eps_ir exceeds this fraction of eps_p
LINEARIZATION_WARNING_RATIO = 0.01

# Stability
BORDERLINE_BAND_THZ = 1e-9
ROUTH_EPSILON = 1e-30

# Peak search and bandwidth
BRACKET_SCAN_POINTS = 64
BANDWIDTH_HALF_SPAN_THZ = 5.0
BANDWIDTH_START_POINTS = 4001
BANDWIDTH_REFINE_FACTOR = 4
BANDWIDTH_RELATIVE_CHANGE = 1e-3
BANDWIDTH_MAX_REFINEMENTS = 8
DIVERGENCE_RELATIVE_THRESHOLD = 1e-12

# Figure preset resolutions
PRESET_POINTS_1D = 400
PRESET_POINTS_2D = 60
PRESET_SPECTRUM_POINTS = 2001


def get_default_workers() -> int:
    """Returns the configured worker count, falling back to sequential evaluation."""
    try:
        return max(1, int(DEFAULT_WORKERS))
    except ValueError:
        return 1


def validate_config() -> tuple[bool, Optional[str]]:
    """
    Checks that the environment knobs hold usable values.

    Returns:
        tuple[bool, Optional[str]]: Check result and an error message when invalid.
    """
    problems = []

    try:
        if int(DEFAULT_WORKERS) < 1:
            problems.append("MOLOPT_WORKERS must be >= 1")
    except ValueError:
        problems.append(f"MOLOPT_WORKERS is not an integer: {DEFAULT_WORKERS!r}")

    if LOG_LEVEL not in KNOWN_LOG_LEVELS:
        problems.append(f"MOLOPT_LOG_LEVEL is not a known level: {LOG_LEVEL!r}")

    if problems:
        return False, f"Invalid environment configuration: {'; '.join(problems)}"

    return True, None
