"""Exception types shared across the package."""

from __future__ import annotations


class EvaluationError(RuntimeError):
    """A signal or network produced a non-finite value during evaluation."""


class DivergenceError(RuntimeError):
    """A numeric process left the finite range.

    Raised by the fixed-step integrator (carries the failing time) and by the
    training loops (carries the failing iteration and the loss breakdown seen
    there).
    """

    def __init__(self, message: str, *, time: float | None = None,
                 iteration: int | None = None, breakdown=None):
        super().__init__(message)
        self.time = time
        self.iteration = iteration
        self.breakdown = breakdown


class DatasetFormatError(ValueError):
    """A dataset file failed to parse or violated a structural invariant."""
