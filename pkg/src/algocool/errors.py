"""Exception hierarchy shared by every algocool module."""

from __future__ import annotations


class AlgoCoolError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AlgoCoolError, ValueError):
    """A parameter lies outside the range where the quantity is defined."""


class ShapeError(AlgoCoolError, ValueError):
    """Subsystem dimensions of two objects do not line up."""


class PreconditionError(AlgoCoolError, ValueError):
    """Inputs violate the structural assumptions of an identity or bound."""


class ConvergenceError(AlgoCoolError, RuntimeError):
    """An iteration stopped at its round budget without settling.

    The last iterate is kept on ``state`` so callers can inspect how far
    the run got.
    """

    def __init__(self, message: str, state=None, rounds: int | None = None):
        super().__init__(message)
        self.state = state
        self.rounds = rounds
