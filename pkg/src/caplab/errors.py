"""Exception hierarchy. CLI exit codes key off these classes."""

from __future__ import annotations


class CaplabError(Exception):
    exit_code = 3


class InvalidInputError(CaplabError, ValueError):
    exit_code = 2


class ExpressionParseError(InvalidInputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ToleranceError(CaplabError):
    """Adaptive quadrature failed to reach its tolerance."""


class TruncationInfeasibleError(CaplabError):
    """No truncation width satisfies the margin conditions."""


class AdmissibilityViolationError(CaplabError):
    exit_code = 1

    def __init__(self, message: str, witness: float | None = None):
        super().__init__(message)
        self.witness = witness


class DivergenceError(CaplabError):
    def __init__(self, message: str, exit_time: float):
        super().__init__(message)
        self.exit_time = exit_time


class ContinuationFailureError(CaplabError):
    def __init__(self, message: str, epsilon: float):
        super().__init__(message)
        self.epsilon = epsilon


class InsufficientDataError(CaplabError):
    exit_code = 2
