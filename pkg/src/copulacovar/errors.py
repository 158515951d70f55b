"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class CoVaRError(Exception):
    """Base class for all errors raised by copulacovar."""


class DomainError(CoVaRError, ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(DomainError):
    """The root bracket does not enclose a sign change."""


class UndefinedMomentError(DomainError):
    """The requested moment does not exist for the distribution."""


class ConvergenceError(CoVaRError, ArithmeticError):
    """An iterative method failed to converge.

    ``best_estimate`` holds the last iterate and ``residual`` its function value.
    """

    def __init__(self, message: str, best_estimate: float, residual: float):
        super().__init__(f"{message} (best estimate {best_estimate!r}, residual {residual:.3e})")
        self.best_estimate = best_estimate
        self.residual = residual


class InsufficientDataError(CoVaRError):
    """Too few samples fall in the region required by an estimator."""


class DegenerateDataError(CoVaRError, ValueError):
    """The data carry no information for the requested statistic."""


class ParseError(CoVaRError, ValueError):
    """A loss file could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row
