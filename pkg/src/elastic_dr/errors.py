"""Exception types raised across the package."""

from __future__ import annotations


class FixtureError(ValueError):
    """A fixture file is missing, malformed, or violates an invariant."""

    def __init__(self, path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class InfeasiblePopulation(ValueError):
    """Bus demand cannot be split among its customers within the class demand range."""


class SamplingError(RuntimeError):
    """The truncated-normal rejection loop hit its attempt cap."""


class ConstraintUnreachable(ArithmeticError):
    """The balance constraint does not depend on the Lagrange multiplier."""
