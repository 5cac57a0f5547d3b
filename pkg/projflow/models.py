"""
Report records for projflow.

These models describe verification and classification outcomes.
Designed to be serializable to the JSON reports of the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class VerificationMode(str, Enum):
    """How an identity was checked."""

    EXACT = "exact"
    SERIES = "series"
    NUMERIC = "numeric"


class Verdict(str, Enum):
    """Negative outcomes of bounded searches."""

    NON_ALGEBRAIC_HOMOGENEOUS = "NonAlgebraicHomogeneous"
    NO_RATIONAL_PARTICULAR = "NoRationalParticularWithinBound"
    NOT_PERFECT_SQUARE = "NotPerfectSquare"


@dataclass(frozen=True)
class Discrepancy:
    """First place where two sides of an identity disagree."""

    location: str
    lhs: str
    rhs: str

    def to_dict(self) -> dict[str, str]:
        return {"location": self.location, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a translation-equation or similar check."""

    mode: VerificationMode
    passed: bool
    order_or_samples: int | None = None
    first_discrepancy: Discrepancy | None = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "pass": self.passed,
            "order_or_samples": self.order_or_samples,
            "first_discrepancy": (
                self.first_discrepancy.to_dict() if self.first_discrepancy else None
            ),
        }


@dataclass(frozen=True)
class VerdictResult:
    """A search verdict with a short explanation."""

    verdict: Verdict
    detail: str = ""

    def to_dict(self) -> dict[str, str]:
        return {"verdict": self.verdict.value, "detail": self.detail}


@dataclass
class ClassReport:
    """Classification summary of a plane vector field or flow."""

    level: int | None
    solenoidal: bool
    i0_symmetric: bool
    i_symmetric: bool
    mode: VerificationMode = VerificationMode.EXACT
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "level": self.level,
            "solenoidal": self.solenoidal,
            "i0_symmetric": self.i0_symmetric,
            "i_symmetric": self.i_symmetric,
            "mode": self.mode.value,
        }
        if self.notes:
            result["notes"] = list(self.notes)
        return result
