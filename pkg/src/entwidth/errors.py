"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EntwidthError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EntwidthError, ValueError):
    """An argument lies outside the domain of the operation."""


class SizeLimitError(EntwidthError):
    """The requested computation exceeds a configured size limit."""


class FormatError(DomainError):
    """A text or JSON input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ImpossibleBranchError(EntwidthError):
    """A forced measurement outcome has (numerically) zero probability."""

    def __init__(self, step: int, outcome: int, probability: float):
        self.step = step
        self.outcome = outcome
        self.probability = probability
        super().__init__(
            f"step {step}: outcome {outcome} has probability {probability!r}, branch is impossible"
        )
