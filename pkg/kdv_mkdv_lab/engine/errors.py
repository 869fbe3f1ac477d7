"""Error hierarchy shared by the engine modules and the CLI."""

from typing import Optional, Tuple


class LabError(Exception):
    """Base error of the lab.

    Every error keeps the human-readable message and the optional
    underlying exception, and carries a category used by the CLI to pick
    its exit code.
    """

    category = "runtime"
    exit_code = 3

    def __init__(self, message: str, cause: Optional[Exception] = None):
        self.message = message
        self.cause = cause
        super().__init__(message)


class ParameterError(LabError, ValueError):
    """A precondition of an operation is violated."""

    category = "validation"
    exit_code = 2


class ConfigValidationError(ParameterError):
    """Run configuration failed to parse or validate."""

    def __init__(
        self,
        message: str,
        cause: Optional[Exception] = None,
        line: Optional[int] = None,
    ):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, cause)


class PoleError(LabError):
    """A denominator magnitude fell below the pole threshold."""

    category = "pole"

    def __init__(
        self,
        message: str,
        location: Optional[Tuple[float, float]] = None,
        magnitude: Optional[float] = None,
        cause: Optional[Exception] = None,
    ):
        self.location = location
        self.magnitude = magnitude
        super().__init__(message, cause)


class NonRealSolutionError(LabError):
    """A complex solution was requested into a real field state."""

    category = "reality"


class InstabilityError(LabError):
    """Blow-up, non-finite values, or a time step above the stability limit."""

    category = "instability"

    def __init__(
        self,
        message: str,
        failure_time: Optional[float] = None,
        cause: Optional[Exception] = None,
    ):
        self.failure_time = failure_time
        super().__init__(message, cause)
