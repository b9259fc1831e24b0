from __future__ import annotations

from typing import TYPE_CHECKING, Any, Optional

if TYPE_CHECKING:  # pragma: no cover
    from .fitting.types import FitReport

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NON_CONVERGENCE = 3
EXIT_IO = 4


class MevError(ValueError):
    """Base class for every error raised by mev_extremes.

    Subclasses `ValueError` so callers that only guard against invalid input keep working.
    """

    exit_code = EXIT_VALIDATION


class DomainError(MevError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(MevError):
    """An invalid series, model or configuration."""


class ParseError(ValidationError):
    def __init__(self, message: str, *, row: Optional[int] = None) -> None:
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{message}")


class DuplicateDate(ParseError):
    def __init__(self, date: Any, *, row: int) -> None:
        self.date = date
        super().__init__(f"duplicate date {str(date)!r}", row=row)


class NegativeAmount(ParseError):
    def __init__(self, amount: float, *, row: int) -> None:
        self.amount = amount
        super().__init__(f"negative amount {amount!r}", row=row)


class EmptyInterval(ValidationError):
    def __init__(self, start_year: int, end_year: int) -> None:
        self.start_year = start_year
        self.end_year = end_year
        super().__init__(f"No records in interval {start_year}-{end_year}")


class NonFiniteValue(ValidationError):
    pass


class InsufficientData(MevError):
    def __init__(self, message: str, *, needed: int, got: int) -> None:
        self.needed = needed
        self.got = got
        super().__init__(f"{message} (need >= {needed}, got {got})")


class DegenerateFit(MevError):
    exit_code = EXIT_NON_CONVERGENCE


class NonConvergence(MevError):
    exit_code = EXIT_NON_CONVERGENCE

    def __init__(self, message: str, *, report: Optional["FitReport"] = None) -> None:
        self.report = report
        super().__init__(message)


class TooManyFailures(MevError):
    exit_code = EXIT_NON_CONVERGENCE

    def __init__(self, what: str, *, dropped: int, total: int) -> None:
        self.dropped = dropped
        self.total = total
        super().__init__(f"{what}: {dropped} of {total} replicates failed (limit 20%)")
