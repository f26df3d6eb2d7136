"""Custom exceptions for macro ranking."""


class MacroRankingError(Exception):
    """Base exception for all macro ranking errors."""

    def __init__(self, message: str, cause: Exception | None = None):
        """Initialize with an error message and optional cause.

        Args:
            message: Error message
            cause: Optional exception that caused this error
        """
        self.message = message
        self.cause = cause
        super().__init__(message)


class ValidationError(MacroRankingError):
    """Exception raised for invalid inputs, including dimension mismatches."""

    def __init__(self, message: str, cause: Exception | None = None):
        super().__init__(f"Validation error: {message}", cause)


class ConfigurationError(MacroRankingError):
    """Exception raised for configuration errors."""

    def __init__(self, message: str, cause: Exception | None = None):
        super().__init__(f"Configuration error: {message}", cause)


class DatasetError(MacroRankingError):
    """Exception raised for malformed dataset files."""

    def __init__(self, message: str, line: int | None = None, cause: Exception | None = None):
        """Initialize with an error message, the offending line, and optional cause.

        Args:
            message: Error message
            line: 1-based line number in the source file, header included
            cause: Optional exception that caused this error
        """
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Dataset error{where}: {message}", cause)


class SolverError(MacroRankingError):
    """Exception raised when an optimization problem cannot be solved."""

    def __init__(self, message: str, step: int | None = None, cause: Exception | None = None):
        """Initialize with an error message, the episode step, and optional cause.

        Args:
            message: Error message
            step: Episode step at which the solve failed, if known
            cause: Optional exception that caused this error
        """
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"Solver error{where}: {message}", cause)


class DecompositionError(MacroRankingError):
    """Exception raised when a policy cannot be split into permutations."""

    def __init__(self, message: str, cause: Exception | None = None):
        super().__init__(f"Decomposition error: {message}", cause)


class ForecastError(MacroRankingError):
    """Exception raised for bootstrap and progress-to-go failures."""

    def __init__(self, message: str, cause: Exception | None = None):
        super().__init__(f"Forecast error: {message}", cause)
