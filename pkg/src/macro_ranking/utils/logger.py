"""Loguru sinks for the library and the command line.

Console output goes to stderr so stdout stays free for tables and messages.
"""

import sys
from pathlib import Path
from typing import Literal

from loguru import logger

from macro_ranking.config.settings import settings

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

SHARED_LOG_NAME = "macro_ranking.log"


def console_level(verbose: bool) -> LogLevel:
    return "DEBUG" if verbose else settings.LOG_LEVEL


def setup_logger(verbose: bool = False) -> None:
    """Replace every sink with the console sink and, outside development, a rotating shared log.

    Args:
        verbose: Log DEBUG records, including per-step controller state
    """
    level = console_level(verbose)
    logger.remove()
    logger.add(sys.stderr, format=settings.LOG_FORMAT, level=level, colorize=True)

    if settings.ENVIRONMENT != "development":
        shared = settings.PROJECT_ROOT / "logs" / SHARED_LOG_NAME
        shared.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            str(shared),
            rotation="10 MB",
            retention="1 week",
            compression="zip",
            level=level,
            format=settings.LOG_FORMAT,
        )
    logger.debug(f"Logging at {level} in the {settings.ENVIRONMENT} environment")


def attach_run_log(path: Path, level: LogLevel = "INFO") -> int:
    """Add a plain-text sink writing one command's records next to its outputs.

    Returns:
        The sink id, for ``logger.remove`` once the command finishes
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    return logger.add(str(path), level=level, format=settings.LOG_FORMAT, colorize=False, mode="w")


def get_command_logger(module_name: str):
    """Logger bound to the calling command module."""
    return logger.bind(module=module_name)
