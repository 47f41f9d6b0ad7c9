"""Exception hierarchy shared by all irrcorr modules."""

from __future__ import annotations


class IrrcorrError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(IrrcorrError, ValueError):
    """Input failed a structural or numerical invariant check."""


class SizeLimitError(ValidationError):
    """Requested dense object exceeds the configured qubit limit."""


class NotAStateError(ValidationError):
    """Operator is not a valid density matrix (e.g. negative eigenvalue)."""


class RankDeficientError(ValidationError):
    """State fails the full-rank gate required by the numeric solver."""


class GroupError(ValidationError):
    """Generator list does not define a valid stabilizer group.

    ``kind`` is one of ``"noncommuting"``, ``"dependent"``, ``"phase"``,
    ``"size"`` or ``"empty"``; ``indices`` holds the offending 1-based
    generator positions.
    """

    def __init__(self, message: str, kind: str, indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.kind = kind
        self.indices = indices


class ConsistencyError(IrrcorrError, RuntimeError):
    """An internal numerical consistency check failed."""


class ConvergenceError(IrrcorrError, RuntimeError):
    """Iterative solver stopped without meeting its tolerance.

    The best iterate found so far is attached as ``best`` (may be None).
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DivergenceError(ConvergenceError):
    """Dual parameters grew past the overflow guard."""
