"""
1-homogeneous birational maps, linear maps and conjugation.

Supports:
- BirMap1H: x_i·A(x) with A = P/Q 0-homogeneous; maps of this shape
  compose by multiplying their A-functions and therefore commute
- TupleBirMap: an arbitrary tuple of 1-homogeneous rational functions with
  a stored inverse, validated by exact round trip
- LinMap: a non-degenerate matrix
- Conjugation m^(-1)∘phi∘m of flows and the matching transformation of
  vector fields
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Union

import sympy
from sympy import Expr, Matrix, Rational, Symbol

from projflow.algebra.expr import (
    as_expr,
    default_variables,
    homogeneity_degree,
    is_rational_expr,
    sort_symbols,
    substitute,
    tidy,
)
from projflow.algebra.printer import format_expr, format_tuple
from projflow.algebra.ratfunc import RatFunc
from projflow.errors import DomainError
from projflow.flows.core import FlowMap, VectorField

logger = logging.getLogger(__name__)


def _canonical(values: Sequence[Expr], variables: Sequence[Symbol]) -> tuple[Expr, ...]:
    if all(is_rational_expr(v, variables) for v in values):
        return tuple(RatFunc.from_expr(v, variables).as_expr() for v in values)
    return tuple(tidy(v) for v in values)


def _compose_rational(
    outer: Sequence[Expr],
    outer_variables: Sequence[Symbol],
    inner: Sequence[object],
    variables: Sequence[Symbol],
) -> tuple[RatFunc, ...] | None:
    """outer(inner) in polynomial arithmetic, or None when either side has radicals."""
    if not all(is_rational_expr(c, outer_variables) for c in outer):
        return None
    values = [v if isinstance(v, RatFunc) else as_expr(v) for v in inner]
    if not all(isinstance(v, RatFunc) or is_rational_expr(v, variables) for v in values):
        return None
    return tuple(
        RatFunc.from_expr(c, outer_variables).compose(values, variables) for c in outer
    )


class BirMap(ABC):
    """A map of R^n given by components in its own coordinate variables."""

    variables: tuple[Symbol, ...]

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    @abstractmethod
    def components(self) -> tuple[Expr, ...]: ...

    @abstractmethod
    def inverse(self) -> BirMap: ...

    @abstractmethod
    def to_dict(self) -> dict[str, Any]: ...

    def apply(self, values: Sequence[object]) -> tuple[Expr, ...]:
        """The map evaluated at a tuple of expressions."""
        if len(values) != self.dim:
            raise DomainError(f"map of dimension {self.dim} applied to {len(values)} values")
        bindings = dict(zip(self.variables, (as_expr(v) for v in values)))
        return tuple(substitute(c, bindings) for c in self.components)

    def compose(self, inner: BirMap) -> TupleBirMap:
        """self after inner."""
        back = inner.inverse()
        forward = _compose_rational(
            self.components, self.variables, inner.components, inner.variables
        )
        backward = _compose_rational(
            back.components, back.variables, self.inverse().components, self.variables
        )
        if forward is not None and backward is not None:
            return TupleBirMap(
                tuple(f.as_expr() for f in forward),
                tuple(b.as_expr() for b in backward),
                inner.variables,
            )
        return TupleBirMap(
            _canonical(self.apply(inner.components), inner.variables),
            _canonical(back.apply(self.inverse().components), self.variables),
            inner.variables,
        )


@dataclass(frozen=True)
class BirMap1H(BirMap):
    """l_{P,Q}(x) = x·P(x)/Q(x), stored through A = P/Q."""

    A: RatFunc

    @classmethod
    def from_pq(
        cls, P: object, Q: object, variables: Sequence[Symbol] | None = None
    ) -> BirMap1H:
        p, q = as_expr(P), as_expr(Q)
        if variables is None:
            names = {s.name for s in (p.free_symbols | q.free_symbols)}
            arity = 3 if names & {"z", "w"} else 2
            variables = default_variables(arity, names)
        variables = tuple(variables)
        polys = []
        for label, value in (("P", p), ("Q", q)):
            if value == 0:
                raise DomainError(f"{label} must be nonzero")
            if not value.is_polynomial(*variables):
                raise DomainError(f"{label} = {value} is not a polynomial in {variables}")
            poly = sympy.Poly(value, *variables)
            if not poly.is_homogeneous:
                raise DomainError(f"{label} = {value} is not homogeneous")
            polys.append(poly)
        if polys[0].total_degree() != polys[1].total_degree():
            raise DomainError("P and Q must have the same degree")
        return cls(RatFunc.from_expr(p / q, variables))

    @classmethod
    def from_ratio(cls, A: object, variables: Sequence[Symbol] | None = None) -> BirMap1H:
        value = A if isinstance(A, RatFunc) else None
        if value is None:
            expr = as_expr(A)
            gens = variables or default_variables(2, {s.name for s in expr.free_symbols})
            value = RatFunc.from_expr(expr, gens)
        elif variables is not None:
            value = value.with_gens(variables)
        if value.is_zero:
            raise DomainError("A must be nonzero")
        degree = homogeneity_degree(value.as_expr(), value.gens)
        if degree != 0:
            raise DomainError(f"A = {value} is not 0-homogeneous")
        return cls(value)

    @property
    def variables(self) -> tuple[Symbol, ...]:  # type: ignore[override]
        return self.A.gens

    @property
    def P(self) -> Expr:
        return self.A.num.as_expr()

    @property
    def Q(self) -> Expr:
        return self.A.den.as_expr()

    @property
    def components(self) -> tuple[Expr, ...]:
        a = self.A.as_expr()
        return tuple(v * a for v in self.variables)

    def inverse(self) -> BirMap1H:
        return BirMap1H(1 / self.A)

    def then(self, other: BirMap1H) -> BirMap1H:
        """Composition of two maps of this shape, in either order."""
        return BirMap1H(self.A * other.A.with_gens(self.variables))

    def is_symmetric(self) -> bool:
        """A(x, y) = A(y, x)."""
        if self.dim != 2:
            return False
        x, y = self.variables
        return self.A.subs({x: y, y: x}, self.variables) == self.A

    def to_tuple(self) -> TupleBirMap:
        return TupleBirMap(self.components, self.inverse().components, self.variables)

    def to_dict(self) -> dict[str, Any]:
        return {"P": format_expr(self.P), "Q": format_expr(self.Q)}


@dataclass(frozen=True)
class TupleBirMap(BirMap):
    """An explicit 1-homogeneous birational tuple with its inverse."""

    forward: tuple[Expr, ...]
    backward: tuple[Expr, ...]
    variables: tuple[Symbol, ...]  # type: ignore[misc]

    def __post_init__(self) -> None:
        if not (len(self.forward) == len(self.backward) == len(self.variables)):
            raise DomainError("map, inverse and coordinates differ in length")
        for label, values in (("map", self.forward), ("inverse", self.backward)):
            for value in values:
                if homogeneity_degree(value, self.variables) != 1:
                    raise DomainError(f"{label} component {value} is not 1-homogeneous")
        for first, second in ((self.forward, self.backward), (self.backward, self.forward)):
            images = _compose_rational(first, self.variables, second, self.variables)
            if images is None:
                bindings = dict(zip(self.variables, second))
                images = tuple(
                    RatFunc.from_expr(substitute(c, bindings), self.variables) for c in first
                )
            if any(image != var for image, var in zip(images, self.variables)):
                raise DomainError("the stored inverse does not invert the map")

    @classmethod
    def of(
        cls,
        forward: Sequence[object],
        inverse: Sequence[object],
        variables: Sequence[Symbol] | None = None,
    ) -> TupleBirMap:
        f = tuple(as_expr(v) for v in forward)
        b = tuple(as_expr(v) for v in inverse)
        if variables is None:
            names = {s.name for e in f + b for s in e.free_symbols}
            variables = default_variables(len(f), names)
        return cls(_canonical(f, variables), _canonical(b, variables), tuple(variables))

    @property
    def components(self) -> tuple[Expr, ...]:
        return self.forward

    def inverse(self) -> TupleBirMap:
        return TupleBirMap(self.backward, self.forward, self.variables)

    def to_dict(self) -> dict[str, Any]:
        return {"tuple": format_tuple(self.forward), "inverse": format_tuple(self.backward)}


@dataclass(frozen=True)
class LinMap(BirMap):
    """x -> M x with det M != 0."""

    matrix: Matrix
    variables: tuple[Symbol, ...]  # type: ignore[misc]

    @classmethod
    def of(
        cls, rows: Sequence[Sequence[object]], variables: Sequence[Symbol] | None = None
    ) -> LinMap:
        matrix = Matrix([[Rational(as_expr(v)) for v in row] for row in rows])
        if not matrix.is_square:
            raise DomainError(f"linear map needs a square matrix, got {matrix.shape}")
        if matrix.det() == 0:
            raise DomainError("linear map is singular")
        if variables is None:
            variables = default_variables(matrix.rows)
        return cls(matrix, tuple(variables))

    @classmethod
    def identity(cls, dim: int) -> LinMap:
        return cls.of(sympy.eye(dim).tolist())

    @property
    def components(self) -> tuple[Expr, ...]:
        return tuple(self.matrix * Matrix(self.variables))

    def inverse(self) -> LinMap:
        return LinMap(self.matrix.inv(), self.variables)

    @property
    def determinant(self) -> Rational:
        return Rational(self.matrix.det())

    def to_dict(self) -> dict[str, Any]:
        return {"linear": [[format_expr(v) for v in row] for row in self.matrix.tolist()]}


AnyMap = Union[BirMap1H, TupleBirMap, LinMap]


def swap_map() -> LinMap:
    """i0(x, y) = (y, x)."""
    return LinMap.of([[0, 1], [1, 0]])


def involution_i() -> TupleBirMap:
    """i(x, y) = (y^2/x, y)."""
    x, y = default_variables(2)
    return TupleBirMap.of((y**2 / x, y), (y**2 / x, y))


def l0_map() -> BirMap1H:
    """l0(x, y) = (xy/(x+y), y^2/(x+y)); satisfies i0∘l0 = l0∘i."""
    x, y = default_variables(2)
    return BirMap1H.from_pq(y, x + y)


def apply_bir(m: BirMap, values: Sequence[object]) -> tuple[Expr, ...]:
    """Componentwise x_i·P/Q (or the general map) at the given tuple."""
    result = m.apply(values)
    free = sort_symbols({s for v in result for s in v.free_symbols})
    return _canonical(result, free) if free else result


def conjugate_flow(flow: FlowMap, m: BirMap) -> FlowMap:
    """m^(-1)∘phi∘m."""
    if m.dim != flow.dim:
        raise DomainError(f"map of dimension {m.dim} for a flow of dimension {flow.dim}")
    back = m.inverse()
    inner = _compose_rational(m.components, m.variables, flow.variables, flow.variables)
    if flow.is_rational and inner is not None:
        middle = tuple(f.compose(inner, flow.variables) for f in flow.ratfuncs())
        outer = _compose_rational(back.components, back.variables, middle, flow.variables)
    else:
        outer = None
    if outer is not None:
        result = FlowMap(tuple(r.as_expr() for r in outer), flow.variables)
    else:
        middle_exprs = flow(*m.apply(flow.variables))
        result = FlowMap(_canonical(back.apply(middle_exprs), flow.variables), flow.variables)
    logger.debug(f"conjugated {flow.label} into {result.label}")
    return result


def conjugate_vf(field_: VectorField, m: BirMap1H) -> VectorField:
    """
    Vector field of l^(-1)∘phi∘l for l = x·A:
    varpi' = A·varpi - A_y·(x·rho - y·varpi), rho' = A·rho + A_x·(x·rho - y·varpi).
    """
    if field_.dim != 2 or m.dim != 2:
        raise DomainError("conjugate_vf needs plane data")
    x, y = field_.variables
    A = m.A.with_gens(m.variables).subs(dict(zip(m.variables, (x, y))), (x, y))
    varpi, rho = field_.components
    cross = field_.cross()
    new_varpi = A * varpi - A.diff(y) * cross
    new_rho = A * rho + A.diff(x) * cross
    return VectorField((new_varpi, new_rho))


def conjugate_vf_linear(field_: VectorField, L: LinMap) -> VectorField:
    """L^(-1)·V(L x)."""
    if L.dim != field_.dim:
        raise DomainError(f"linear map of dimension {L.dim} for a field of dimension {field_.dim}")
    variables = field_.variables
    image = L.matrix * Matrix(variables)
    bindings = dict(zip(variables, image))
    moved = Matrix([substitute(e, bindings) for e in field_.exprs])
    values = L.matrix.inv() * moved
    return VectorField.of(list(values), variables)
