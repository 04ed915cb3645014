"""Exception types and structured precondition records shared across modules."""

from __future__ import annotations

from dataclasses import dataclass


class CMSteinError(Exception):
    """Base class for every error raised by this package."""


class OddTotal(CMSteinError):
    pass


class DegenerateN(CMSteinError):
    pass


class EmptyModel(CMSteinError):
    pass


class AttemptsExhausted(CMSteinError):
    def __init__(self, attempts: int):
        super().__init__(f"no simple configuration found in {attempts} attempts")
        self.attempts = attempts


class PreconditionViolated(CMSteinError):
    pass


class NeedsLargerN(CMSteinError):
    pass


class NonpositiveLambda(CMSteinError):
    pass


class BudgetExceeded(CMSteinError):
    pass


class TooLarge(CMSteinError):
    pass


class ConfigError(CMSteinError):
    pass


@dataclass(frozen=True)
class PreconditionFailed:
    """Returned in place of a bound whose hypotheses do not hold."""

    quantity: str
    reason: str

    def to_dict(self) -> dict:
        return {"precondition_failed": self.reason}
