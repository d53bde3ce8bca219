"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: DomainError -> 1, structured analytic
failures (CapExceededError, GenerationError) -> 2, FormatError -> 3.
"""

from __future__ import annotations


class HyperregError(Exception):
    """Base class for all toolkit errors."""


class DomainError(HyperregError):
    """Invalid input for an operation (empty part, bad index, wrong shape)."""


class SizeError(DomainError):
    """An exhaustive-mode request exceeds the supported desk-scale size."""


class GenerationError(HyperregError):
    """A randomized generator exhausted its retry budget.

    Carries the best certification report seen so the caller can inspect how
    close the generator got.
    """

    def __init__(self, message: str, best_report=None):
        super().__init__(message)
        self.best_report = best_report


class CapExceededError(HyperregError):
    """Color grouping needed more representatives than the cap allows."""

    def __init__(self, message: str, pair=None, reps=None, cap=None):
        super().__init__(message)
        self.pair = pair
        self.reps = reps
        self.cap = cap


class FormatError(HyperregError):
    """Malformed or schema-invalid input file."""
