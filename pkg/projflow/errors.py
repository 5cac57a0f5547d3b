"""
Exception hierarchy for projflow.

Verification failures are report outcomes, not exceptions. The classes here
cover malformed input and violated mathematical preconditions:
- Expression syntax and unknown variables
- Domain violations (homogeneity, zero denominators, guards)
- Numeric branch and singularity failures
"""

from __future__ import annotations

from typing import Any


class ProjflowError(Exception):
    """Base error carrying a message and machine-readable details."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        return {"error": self.message, **self.details}


class ExpressionSyntaxError(ProjflowError):
    """The expression text does not follow the grammar."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}", {"position": position})


class UnknownVariableError(ProjflowError):
    """A name outside the allowed variable list was used."""

    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(
            f"unknown variable '{name}' at position {position}",
            {"variable": name, "position": position},
        )


class DomainError(ProjflowError):
    """A precondition on the mathematical data does not hold."""


class NotRationalError(DomainError):
    """An exact-only operation received a non-rational expression."""


class BranchError(DomainError):
    """A fractional-power base is not strictly positive at an evaluation point."""

    def __init__(self, message: str, min_base: float):
        self.min_base = min_base
        super().__init__(message, {"min_base": min_base})


class SingularityError(DomainError):
    """A denominator fell below the guard threshold or a value is not finite."""


class CatalogError(DomainError):
    """Unknown catalog family or invalid family parameters."""
