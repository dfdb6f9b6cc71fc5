"""
Exception hierarchy for the HAL toolkit.

Every error carries a human-readable message plus an optional list of
details, formatted the same way as configuration validation errors.
"""

from typing import Any


class HalError(Exception):
    """
    Base class for all toolkit errors.

    Attributes:
        message: Human-readable error summary.
        details: List of individual detail strings.
    """

    def __init__(self, message: str, details: list[str] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or []

    def __str__(self) -> str:
        """Return formatted error message."""
        if not self.details:
            return self.message
        return f"{self.message}: {'; '.join(self.details)}"


class DimensionError(HalError, ValueError):
    """Raised when array shapes or coordinate indices do not agree."""


class DomainError(HalError, ValueError):
    """Raised when a value lies outside the domain an operation accepts."""


class EmptyDatasetError(HalError, ValueError):
    """Raised when an operation receives a dataset without rows."""


class NonFiniteError(HalError, ValueError):
    """Raised when NaN or infinite values reach a numerical routine."""


class DegenerateDataError(HalError):
    """Raised when the data cannot identify the requested quantity."""


class ConvergenceError(HalError):
    """
    Raised when coordinate descent exhausts its sweep budget.

    Attributes:
        trace: Per-sweep records (max coefficient change, objective).
    """

    def __init__(
        self,
        message: str,
        trace: list[dict[str, float]] | None = None,
        details: list[str] | None = None,
    ) -> None:
        super().__init__(message, details)
        self.trace = trace or []


class BisectionError(HalError):
    """Raised when the constraint bisection does not bracket the target norm."""


class SelectorError(HalError):
    """Raised when a selector cannot produce a choice on its grid or path."""


class PositivityError(HalError):
    """
    Raised when too many propensity scores need truncation.

    Attributes:
        rows: Indices of the offending observations.
    """

    def __init__(self, message: str, rows: list[int] | None = None) -> None:
        rows = rows or []
        shown = ", ".join(str(r) for r in rows[:20])
        more = f" (and {len(rows) - 20} more)" if len(rows) > 20 else ""
        super().__init__(message, [f"rows {shown}{more}"] if rows else None)
        self.rows = rows


def describe(error: BaseException) -> dict[str, Any]:
    """Serialize an error for replicate tables and JSON reports."""
    return {
        "type": type(error).__name__,
        "message": str(error),
    }
