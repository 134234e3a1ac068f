"""
Logging setup for the project.
Configures loguru sinks: console output, a daily-rotated file and a separate error file.
"""
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from loguru import logger

from src.config.settings import LOG_LEVEL, LOGS_DIR

LOG_FORMAT = "[{time:YYYY-MM-DD HH:mm:ss}] {level} [{name}:{line}] {message}"

# Sinks installed by setup_logging, keyed by the arguments used
_installed: Dict[Tuple[str, str, str], List[int]] = {}


def setup_logging(
    level: str = LOG_LEVEL,
    log_dir: Optional[Path] = None,
    log_file: str = "molopt.log",
    rotation: str = "00:00",
    retention: str = "30 days",
) -> List[int]:
    """
    Installs the application sinks with time-based rotation.

    Args:
        level: Minimum level for the console and main file sinks
        log_dir: Directory for log files (LOGS_DIR by default)
        log_file: Name of the main log file
        rotation: When to rotate the main file (loguru rotation spec)
        retention: How long rotated files are kept

    Returns:
        Handler ids of the installed sinks
    """
    directory = Path(log_dir) if log_dir is not None else LOGS_DIR
    key = (level, str(directory), log_file)

    # Already configured with the same arguments
    if key in _installed:
        return _installed[key]

    reset_logging()
    directory.mkdir(parents=True, exist_ok=True)

    handler_ids = [
        logger.add(sys.stderr, level=level, format=LOG_FORMAT),
        logger.add(
            directory / log_file,
            level=level,
            format=LOG_FORMAT,
            rotation=rotation,
            retention=retention,
            encoding="utf-8",
        ),
        logger.add(
            directory / "errors.log",
            level="ERROR",
            format=LOG_FORMAT,
            rotation=rotation,
            retention=retention,
            encoding="utf-8",
        ),
    ]
    _installed[key] = handler_ids
    return handler_ids


def reset_logging() -> None:
    """Removes every sink, including loguru's default stderr sink."""
    logger.remove()
    _installed.clear()
