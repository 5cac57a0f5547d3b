"""
Floating-point evaluation of closed forms.

Expressions are compiled once with sympy.lambdify to vectorized numpy
callables. Every base raised to a non-integer power is compiled too, so
that each evaluation reports the smallest such base (the branch
certificate); the principal real power is only defined for positive bases.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import sympy
from numpy.typing import ArrayLike, NDArray
from sympy import Expr, Symbol

from projflow.algebra.expr import as_expr, symbol
from projflow.errors import BranchError, SingularityError

logger = logging.getLogger(__name__)

DENOMINATOR_GUARD = 1e-12


def fractional_bases(expr: Expr) -> list[Expr]:
    """Bases of all powers with non-integer exponent, outermost first."""
    bases: list[Expr] = []
    for node in sympy.preorder_traversal(expr):
        if node.is_Pow and not node.exp.is_Integer and node.base not in bases:
            bases.append(node.base)
    return bases


@dataclass(frozen=True)
class NumericFunction:
    """A compiled closed form with its branch certificate."""

    expr: Expr
    variables: tuple[Symbol, ...]
    _fn: Callable[..., Any] = field(repr=False)
    _bases: tuple[Callable[..., Any], ...] = field(repr=False)

    def evaluate(self, *args: ArrayLike) -> tuple[NDArray[np.float64], float]:
        """Value and the minimal fractional-power base over the given points."""
        arrays = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        min_base = np.inf
        with np.errstate(all="ignore"):
            for base in self._bases:
                values = np.broadcast_to(np.asarray(base(*arrays), dtype=float), shape)
                if values.size:
                    min_base = min(min_base, float(np.min(values)))
            if min_base <= 0:
                raise BranchError(
                    f"non-positive base under a fractional power in {self.expr}", min_base
                )
            value = np.broadcast_to(np.asarray(self._fn(*arrays), dtype=float), shape)
        if not np.all(np.isfinite(value)):
            raise SingularityError(f"{self.expr} is singular at an evaluation point")
        return np.array(value), float(min_base)

    def __call__(self, *args: ArrayLike) -> NDArray[np.float64]:
        return self.evaluate(*args)[0]

    def unchecked(self, *args: ArrayLike) -> NDArray[np.float64]:
        """Raw values: no branch certificate, poles give inf or nan."""
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(*args), dtype=float)


def compile_numeric(expr: object, variables: Sequence[Symbol]) -> NumericFunction:
    value = as_expr(expr)
    variables = tuple(variables)
    fn = sympy.lambdify(variables, value, modules="numpy")
    bases = tuple(sympy.lambdify(variables, b, modules="numpy") for b in fractional_bases(value))
    return NumericFunction(value, variables, fn, bases)


def eval_numeric(f: object, point: Mapping[str | Symbol, float]) -> float:
    """Principal-branch double evaluation at a point given by name or symbol."""
    bound = {symbol(k) if isinstance(k, str) else k: float(v) for k, v in point.items()}
    variables = tuple(bound)
    compiled = compile_numeric(f, variables)
    value, min_base = compiled.evaluate(*bound.values())
    logger.debug(f"evaluated {compiled.expr} with min base {min_base}")
    return float(value)


def guarded_denominators(dens: Sequence[NumericFunction], *args: ArrayLike) -> float:
    """Smallest |denominator|; raises when below the guard threshold."""
    smallest = np.inf
    for den in dens:
        smallest = min(smallest, float(np.min(np.abs(den(*args)))))
    if smallest < DENOMINATOR_GUARD:
        raise SingularityError(f"denominator {smallest:.3e} below guard {DENOMINATOR_GUARD}")
    return float(smallest)
