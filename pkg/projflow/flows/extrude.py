"""
Extrusion of flows into one more dimension, and affine sections.

Given an n-dimensional flow phi and an N-homogeneous function W of n+1
variables, the extra component T solves W(phi(x), T) = W(x, z); the
result is rational when phi is and W is linear-fractional in z.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
import sympy
from numpy.typing import NDArray
from sympy import Expr, Poly, Symbol

from projflow.algebra.expr import (
    as_expr,
    default_variables,
    diff,
    homogeneity_degree,
    is_rational_expr,
    is_zero,
    sort_symbols,
    substitute,
    symbol,
    tidy,
    time_symbol,
)
from projflow.algebra.printer import format_expr, format_tuple
from projflow.algebra.ratfunc import RatFunc
from projflow.errors import DomainError, NotRationalError
from projflow.flows.algebraic import AlgebraicEquation
from projflow.flows.core import (
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    FlowMap,
    VectorField,
    level0_flow,
    sample_points,
    vector_field,
    verify_boundary,
)
from projflow.models import Discrepancy, VerificationMode, VerificationReport

logger = logging.getLogger(__name__)

ExtrusionResult = Union[FlowMap, AlgebraicEquation]


@dataclass(frozen=True)
class Integral3:
    """A homogeneous first integral in the coordinates of the extruded flow."""

    W: Expr
    variables: tuple[Symbol, ...]
    degree: sympy.Rational

    @classmethod
    def of(cls, W: object, variables: Sequence[Symbol] | None = None) -> Integral3:
        expr = as_expr(W)
        if variables is None:
            names = {s.name for s in expr.free_symbols}
            variables = default_variables(4 if "w" in names and "z" in names else 3, names)
        variables = tuple(variables)
        extra = expr.free_symbols - set(variables)
        if extra:
            raise DomainError(f"integral uses {sorted(s.name for s in extra)} outside {variables}")
        degree = homogeneity_degree(expr, variables)
        if degree is None:
            raise DomainError(f"W = {expr} is not homogeneous")
        return cls(expr, variables, degree)

    @property
    def last(self) -> Symbol:
        return self.variables[-1]

    def to_dict(self) -> dict[str, Any]:
        degree = int(self.degree) if self.degree.is_Integer else str(self.degree)
        return {"W": format_expr(self.W), "N": degree}


def _linear_fractional(W: Expr, var: Symbol) -> tuple[Expr, Expr, Expr, Expr] | None:
    """(a, b, c, d) with W = (a·var + b)/(c·var + d), or None."""
    num, den = sympy.fraction(sympy.together(W))
    try:
        p, q = Poly(sympy.expand(num), var), Poly(sympy.expand(den), var)
    except sympy.PolynomialError:
        return None
    if p.degree() > 1 or q.degree() > 1:
        return None
    a, b = (p.all_coeffs() if p.degree() == 1 else [sympy.Integer(0), p.as_expr()])
    c, d = (q.all_coeffs() if q.degree() == 1 else [sympy.Integer(0), q.as_expr()])
    return a, b, c, d


def extrude_flow(flow: FlowMap, integral: Integral3) -> ExtrusionResult:
    """The flow phi(x) • T(x, z) with W(phi(x), T) = W(x, z)."""
    if is_zero(diff(integral.W, integral.last)):
        raise DomainError(f"W = {integral.W} does not depend on {integral.last}")
    if len(integral.variables) != flow.dim + 1:
        raise DomainError(
            f"a flow of dimension {flow.dim} needs an integral in {flow.dim + 1} variables"
        )
    base = integral.variables[:-1]
    flow = flow.rename(base)
    if not verify_boundary(flow):
        raise DomainError(f"{flow.label} fails the boundary condition")

    last = integral.last
    image = dict(zip(base, flow.components))
    target = integral.W
    variables = integral.variables
    shape = _linear_fractional(integral.W, last)
    if shape is not None:
        a, b, c, d = (substitute(e, image) for e in shape)
        T = (b - d * target) / (c * target - a)
        if is_rational_expr(T, variables):
            T = RatFunc.from_expr(T, variables).as_expr()
        else:
            T = tidy(T)
        logger.debug(f"extruded {flow.label} rationally in {last}")
        return FlowMap((*flow.components, T), variables)

    unknown = symbol("T")
    moved = substitute(integral.W, {**image, last: unknown})
    equation = AlgebraicEquation.of(
        moved - target, unknown, len(base), (*flow.components, None), variables
    )
    logger.debug(f"extrusion of {flow.label} is algebraic of degree {equation.degree}")
    return equation


def vf3_from_integral(field_: VectorField, integral: Integral3) -> VectorField:
    """Append sigma = -(sum W_(x_i)·V_i)/W_z to a field in the first n coordinates."""
    W, last = integral.W, integral.last
    W_last = diff(W, last)
    if is_zero(W_last):
        raise DomainError(f"W = {W} does not depend on {last}")
    base = integral.variables[:-1]
    if field_.dim != len(base):
        raise DomainError(
            f"field of dimension {field_.dim} for an integral in {integral.variables}"
        )
    field_ = field_.rename(base)
    total = sympy.Add(*[diff(W, v) * comp for v, comp in zip(base, field_.exprs)])
    sigma = tidy(-total / W_last)
    if not is_rational_expr(sigma, integral.variables):
        raise NotRationalError(f"third component {sigma} is not rational")
    return VectorField.of((*field_.exprs, sigma), integral.variables)


def level0_ndim(J: object, n: int) -> FlowMap:
    """x_i/(1 - J(x)) in n coordinates for a 1-homogeneous J."""
    expr = as_expr(J)
    variables = default_variables(n, {s.name for s in expr.free_symbols})
    extra = expr.free_symbols - set(variables)
    if extra:
        raise DomainError(f"J uses {sorted(s.name for s in extra)} outside {variables}")
    if homogeneity_degree(expr, variables) != 1:
        raise DomainError(f"J = {expr} is not 1-homogeneous")
    return level0_flow(expr, variables)


@dataclass(frozen=True)
class AffineSection:
    """F(x, t) = t^(-1)·phi(x t, t): an affine flow on the slice x_(n+1) = 1."""

    components: tuple[Expr, ...]
    variables: tuple[Symbol, ...]
    parameter: Symbol

    @property
    def is_rational(self) -> bool:
        gens = self.variables + (self.parameter,)
        return all(is_rational_expr(c, gens) for c in self.components)

    def at(self, values: Sequence[object], t: object) -> tuple[Expr, ...]:
        bindings = dict(zip(self.variables, (as_expr(v) for v in values)))
        bindings[self.parameter] = as_expr(t)
        return tuple(substitute(c, bindings) for c in self.components)

    def verify(
        self, tol: float = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES, seed: int = 0
    ) -> VerificationReport:
        """F(F(x, s), t) = F(x, s + t), exactly when rational."""
        s, t = time_symbol("s"), time_symbol("t")
        inner = self.at(self.variables, s)
        lhs = self.at(inner, t)
        rhs = self.at(self.variables, s + t)
        if self.is_rational:
            gens = self.variables + (s, t)
            for idx, (a, b) in enumerate(zip(lhs, rhs)):
                if RatFunc.from_expr(a, gens) != RatFunc.from_expr(b, gens):
                    found = Discrepancy(f"component {idx + 1}", format_expr(a), format_expr(b))
                    return VerificationReport(VerificationMode.EXACT, False, 0, found)
            return VerificationReport(VerificationMode.EXACT, True, 0)

        gens = self.variables + (s, t)
        points = list(sample_points(len(gens), samples, seed))
        for idx, (a, b) in enumerate(zip(lhs, rhs)):
            left = sympy.lambdify(gens, a, modules="numpy")(*points)
            right = sympy.lambdify(gens, b, modules="numpy")(*points)
            err = np.abs(np.asarray(left - right, dtype=float))
            err = err / np.maximum(1.0, np.abs(np.asarray(right, dtype=float)))
            bad: NDArray[np.intp] = np.flatnonzero(~(err <= tol))
            if bad.size:
                j = int(bad[0])
                found = Discrepancy(f"sample {j}, component {idx + 1}", str(left[j]), str(right[j]))
                return VerificationReport(VerificationMode.NUMERIC, False, samples, found)
        return VerificationReport(VerificationMode.NUMERIC, True, samples)

    def to_dict(self) -> dict[str, Any]:
        return {
            "section": format_tuple(self.components),
            "variables": [v.name for v in self.variables],
            "parameter": self.parameter.name,
        }


def section_affine(flow: FlowMap, fixed: int | None = None) -> AffineSection:
    """Slice a flow fixing one coordinate to an affine flow in the others."""
    index = flow.dim - 1 if fixed is None else fixed
    if not 0 <= index < flow.dim or flow.dim < 2:
        raise DomainError(f"cannot fix coordinate {index + 1} of a {flow.dim}-dimensional flow")
    if not vector_field(flow).components[index].is_zero:
        raise DomainError(
            f"{flow.label} moves {flow.variables[index]}; only a fixed coordinate can be sliced"
        )
    t = time_symbol("t")
    others = tuple(v for k, v in enumerate(flow.variables) if k != index)
    bindings: dict[Symbol, Expr] = {v: v * t for v in others}
    bindings[flow.variables[index]] = t
    values = []
    for k, comp in enumerate(flow.components):
        if k == index:
            continue
        value = substitute(comp, bindings) / t
        gens = sort_symbols(set(others) | {t})
        if is_rational_expr(value, gens):
            values.append(RatFunc.from_expr(value, gens).as_expr())
        else:
            values.append(tidy(value))
    logger.debug(f"section of {flow.label} along {flow.variables[index]}")
    return AffineSection(tuple(values), others, t)
