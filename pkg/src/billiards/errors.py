"""Exception types shared across the package."""
from __future__ import annotations


class BilliardError(RuntimeError):
    """Base class for numerical failures."""


class DomainError(BilliardError, ValueError):
    """Phase point outside ``|r| < 1``."""


class DegenerateError(BilliardError):
    """A Jacobian or tangent vanished where the construction needs it nonzero."""


class NewtonDivergence(BilliardError):
    """Newton iteration failed; carries the last iterate and, for orbits, the step index."""

    def __init__(self, message, last_iterate=None, index=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.index = index


class ContinuationError(BilliardError):
    """Numerical continuation in the complex domain lost the branch."""

    def __init__(self, message, stage=None, node=None, reached=None):
        super().__init__(message)
        self.stage = stage
        self.node = node
        self.reached = reached


class NotHyperbolicError(BilliardError):
    """Periodic orbit has no real positive saddle multipliers."""
