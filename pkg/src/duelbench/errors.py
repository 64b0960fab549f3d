"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DuelBenchError(Exception):
    """Base class for all package errors."""


class ValidationError(DuelBenchError, ValueError):
    """A preference matrix (or a sequence of them) violates its constraints.

    ``round`` is the 1-based position inside a sequence file when known.
    """

    def __init__(self, message: str, round: int | None = None):
        if round is not None:
            message = f"round {round}: {message}"
        super().__init__(message)
        self.round = round


class ShapeError(ValidationError):
    pass


class AsymmetryError(ValidationError):
    pass


class DiagonalError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class DegenerateDistribution(ValidationError):
    pass


class ParamError(DuelBenchError, ValueError):
    pass


class HorizonError(DuelBenchError, IndexError):
    pass


class GapViolation(DuelBenchError):
    def __init__(self, message: str, first_violation: int | None = None):
        super().__init__(message)
        self.first_violation = first_violation


class ParseError(DuelBenchError):
    pass


class IncompleteTrace(DuelBenchError):
    pass


class ProtocolError(DuelBenchError, RuntimeError):
    """``select_pair``/``observe`` called out of order."""
