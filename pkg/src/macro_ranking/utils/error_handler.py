"""Map library failures onto CLI exit codes.

Exit codes: 2 for configuration, validation, and dataset problems; 3 when an
optimization or decomposition fails; 1 for other library errors; 10 for
anything unexpected.
"""

import functools
import sys
import traceback
from collections.abc import Callable
from typing import Any, TypeVar

import click
from loguru import logger

from macro_ranking.config.settings import settings
from macro_ranking.core.exceptions import (
    ConfigurationError,
    DatasetError,
    DecompositionError,
    MacroRankingError,
    SolverError,
    ValidationError,
)

F = TypeVar("F", bound=Callable[..., Any])

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_UNEXPECTED = 10

# First match wins, so subclasses precede MacroRankingError.
EXIT_CODES: tuple[tuple[tuple[type[Exception], ...], int, str], ...] = (
    ((click.UsageError, ConfigurationError, ValidationError, DatasetError), EXIT_CONFIG, ""),
    ((SolverError, DecompositionError), EXIT_SOLVER, ""),
    ((MacroRankingError,), EXIT_ERROR, "Error: "),
)


def exit_code_for(error: Exception) -> tuple[int, str]:
    """Exit code and message prefix for ``error``; unknown errors map to ``EXIT_UNEXPECTED``."""
    for families, code, prefix in EXIT_CODES:
        if isinstance(error, families):
            return code, prefix
    return EXIT_UNEXPECTED, ""


def _report_unexpected(error: Exception) -> None:
    click.secho(f"An unexpected error occurred: {error}", fg="red", err=True)
    logger.opt(exception=error).debug("Unexpected failure")
    if settings.LOG_LEVEL == "DEBUG":
        click.echo(traceback.format_exc(), err=True)
    else:
        click.echo("Run with --verbose for detailed error information.", err=True)


def handle_exceptions(exit_on_error: bool = True) -> Callable[[F], F]:
    """Decorate a command so library errors end it with a message and their exit code.

    Args:
        exit_on_error: Exit the process; otherwise the wrapped call returns None

    Returns:
        A decorator that handles exceptions
    """

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except click.Abort:
                click.echo("\nOperation aborted by user.", err=True)
                code = EXIT_ERROR
            except Exception as e:
                code, prefix = exit_code_for(e)
                logger.debug(f"{func.__name__} failed with {type(e).__name__} (exit {code})")
                if code == EXIT_UNEXPECTED:
                    _report_unexpected(e)
                else:
                    click.secho(f"{prefix}{e}", fg="red", err=True)
            if exit_on_error:
                sys.exit(code)
            return None

        return wrapper  # type: ignore

    return decorator
