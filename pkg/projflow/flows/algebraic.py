"""
Flows defined implicitly by a polynomial equation in one unknown slot.

The unknown component solves P(U; x) = 0. Among the roots the flow uses
the branch that tends to the identity: along the ray s·x, s in (0, 1],
the root starts near s·x_slot and is tracked continuously up to s = 1.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import sympy
from numpy.typing import ArrayLike, NDArray
from sympy import Expr, Poly, Symbol

from projflow.algebra.evaluate import NumericFunction, compile_numeric
from projflow.algebra.expr import as_expr, tidy
from projflow.algebra.printer import format_expr
from projflow.errors import BranchError, DomainError, SingularityError

logger = logging.getLogger(__name__)

CONTINUATION_START = 1e-3
CONTINUATION_STEPS = 160
NEWTON_STEPS = 4
IMAG_TOL = 1e-7


@dataclass(frozen=True)
class AlgebraicEquation:
    """One implicit slot plus closed-form components for the others."""

    coefficients: tuple[Expr, ...]  # leading first
    unknown: Symbol
    slot: int
    known: tuple[Expr | None, ...]
    variables: tuple[Symbol, ...]
    name: str | None = field(default=None, compare=False)

    @classmethod
    def of(
        cls,
        equation: object,
        unknown: Symbol,
        slot: int,
        known: Sequence[object | None],
        variables: Sequence[Symbol],
    ) -> AlgebraicEquation:
        """Build from an expression whose zero set in the unknown defines the slot."""
        numerator, _ = sympy.fraction(sympy.together(as_expr(equation)))
        poly = Poly(sympy.expand(numerator), unknown)
        if poly.degree() < 1:
            raise DomainError(f"equation {numerator} = 0 does not involve {unknown}")
        coefficients = tuple(tidy(c) for c in poly.all_coeffs())
        values = tuple(None if v is None else as_expr(v) for v in known)
        if len(values) != len(variables) or values[slot] is not None:
            raise DomainError("known components must leave exactly the unknown slot open")
        return cls(coefficients, unknown, slot, values, tuple(variables))

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def polynomial(self) -> Expr:
        d = self.degree
        return sympy.Add(*[c * self.unknown ** (d - j) for j, c in enumerate(self.coefficients)])

    def linear_solution(self) -> Expr | None:
        """The root when the equation is linear in the unknown."""
        if self.degree != 1:
            return None
        lead, const = self.coefficients
        return tidy(-const / lead)

    def residual(self, value: object) -> Expr:
        return tidy(self.polynomial.xreplace({self.unknown: as_expr(value)}))

    def numeric(self) -> BranchEvaluator:
        return BranchEvaluator(self)

    def with_name(self, name: str) -> AlgebraicEquation:
        return AlgebraicEquation(
            self.coefficients, self.unknown, self.slot, self.known, self.variables, name
        )

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "equation": format_expr(self.polynomial),
            "unknown": self.unknown.name,
            "slot": self.slot + 1,
            "known": [None if k is None else format_expr(k) for k in self.known],
            "branch": "root continued from s*x along s in (0, 1]",
        }
        if self.name:
            result["name"] = self.name
        return result


class BranchEvaluator:
    """Vectorized evaluation of the identity branch of an AlgebraicEquation."""

    def __init__(self, equation: AlgebraicEquation):
        self.equation = equation
        self.dim = equation.dim
        self.min_base = np.inf
        variables = equation.variables
        self._coefficients: list[NumericFunction] = [
            compile_numeric(c, variables) for c in equation.coefficients
        ]
        self._known: list[NumericFunction | None] = [
            None if k is None else compile_numeric(k, variables) for k in equation.known
        ]

    def _eval(
        self, fn: NumericFunction, points: Sequence[NDArray[np.float64]]
    ) -> NDArray[np.float64]:
        value, min_base = fn.evaluate(*points)
        self.min_base = min(self.min_base, min_base)
        return np.broadcast_to(value, points[0].shape)

    def _coefficient_matrix(self, points: Sequence[NDArray[np.float64]]) -> NDArray[np.float64]:
        rows = np.array([self._eval(fn, points) for fn in self._coefficients])
        scale = np.max(np.abs(rows), axis=0)
        if np.any(scale == 0):
            raise SingularityError(f"equation {self.equation.polynomial} vanishes identically")
        return rows / scale

    def _solve(self, points: Sequence[NDArray[np.float64]]) -> NDArray[np.float64]:
        slot = self.equation.slot
        grid = np.geomspace(CONTINUATION_START, 1.0, CONTINUATION_STEPS)
        current = (grid[0] * points[slot]).astype(complex)
        previous_s = grid[0]
        for s in grid:
            rows = self._coefficient_matrix([p * s for p in points])
            predicted = current * (s / previous_s)
            for i in range(rows.shape[1]):
                roots = np.roots(rows[:, i])
                if roots.size == 0:
                    raise SingularityError(f"no root of {self.equation.polynomial} at s = {s}")
                current[i] = roots[np.argmin(np.abs(roots - predicted[i]))]
            previous_s = s

        rows = self._coefficient_matrix(points)
        for _ in range(NEWTON_STEPS):
            value = np.zeros_like(current)
            slope = np.zeros_like(current)
            for row in rows:
                slope = slope * current + value
                value = value * current + row
            safe = np.abs(slope) > 0
            current = np.where(safe, current - value / np.where(safe, slope, 1), current)

        imag = np.abs(current.imag)
        if np.any(imag > IMAG_TOL * np.maximum(1.0, np.abs(current.real))):
            raise BranchError(
                f"identity branch of {self.equation.polynomial} leaves the real line",
                self.min_base,
            )
        return current.real

    def __call__(self, *coords: ArrayLike) -> list[NDArray[np.float64]]:
        arrays = [np.asarray(c, dtype=float) for c in coords]
        shape = np.broadcast_shapes(*(a.shape for a in arrays))
        points = [np.broadcast_to(a, shape).ravel() for a in arrays]
        values: list[NDArray[np.float64]] = []
        for fn in self._known:
            if fn is None:
                values.append(self._solve(points).reshape(shape))
            else:
                values.append(np.array(self._eval(fn, points)).reshape(shape))
        logger.debug(f"branch evaluated at {points[0].size} points, min base {self.min_base}")
        return values
