"""Tests for the CLI exception decorator."""

import click
import pytest
from click.testing import CliRunner

from macro_ranking.core.exceptions import (
    ConfigurationError,
    DatasetError,
    DecompositionError,
    ForecastError,
    SolverError,
    ValidationError,
)
from macro_ranking.utils.error_handler import (
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_SOLVER,
    EXIT_UNEXPECTED,
    exit_code_for,
    handle_exceptions,
)


def _command_raising(error: Exception) -> click.Command:
    @click.command()
    @handle_exceptions()
    def failing():
        raise error

    return failing


@pytest.mark.parametrize(
    ("error", "code"),
    [
        (ConfigurationError("bad field"), EXIT_CONFIG),
        (ValidationError("wrong shape"), EXIT_CONFIG),
        (DatasetError("ragged", line=3), EXIT_CONFIG),
        (SolverError("infeasible", step=5), EXIT_SOLVER),
        (DecompositionError("no matching"), EXIT_SOLVER),
        (ForecastError("empty stratum"), EXIT_ERROR),
        (RuntimeError("boom"), EXIT_UNEXPECTED),
    ],
)
def test_exit_codes(error, code):
    """Each error family maps to its exit code."""
    result = CliRunner().invoke(_command_raising(error))
    assert result.exit_code == code


def test_message_is_reported():
    """The prefixed library message reaches the user."""
    result = CliRunner().invoke(_command_raising(DatasetError("ragged row", line=7)))
    assert "Dataset error (line 7): ragged row" in result.output


def test_no_exit_returns_none():
    """With ``exit_on_error=False`` the wrapped call returns None."""

    @handle_exceptions(exit_on_error=False)
    def failing():
        raise SolverError("infeasible")

    assert failing() is None


def test_success_passes_value_through():
    """Return values of successful calls are untouched."""

    @handle_exceptions()
    def ok():
        return 42

    assert ok() == 42


def test_exit_code_for_prefixes_generic_library_errors():
    """Only errors without a dedicated family get the generic prefix."""
    assert exit_code_for(ForecastError("missing")) == (EXIT_ERROR, "Error: ")
    assert exit_code_for(click.UsageError("bad flag")) == (EXIT_CONFIG, "")
    assert exit_code_for(KeyError("x")) == (EXIT_UNEXPECTED, "")
