"""
Projective flows and their vector fields.

A flow is an n-tuple of closed forms in n coordinates satisfying the
projective translation equation, in composition form
phi^w(phi^z(x)) = phi^(z+w)(x) with phi^z(x) = z^(-1)·phi(x z), together
with the boundary condition phi^z(x) -> x as z -> 0.

Handles:
- Time shift and vector-field extraction (exact, or by series for radicals)
- Boundary, translation-equation and PDE verification
- Formal series integration of a vector field
- Level-0 detection
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol, Union

import numpy as np
import sympy
from numpy.typing import ArrayLike, NDArray
from sympy import Expr, Symbol

from projflow.algebra.evaluate import NumericFunction, compile_numeric
from projflow.algebra.expr import (
    as_expr,
    check_closed_form,
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
from projflow.algebra.ratfunc import RatFunc, composition_parts, ratfuncs
from projflow.errors import DomainError, NotRationalError
from projflow.flows.series import PrecisionLost, expand_series, shifted_series
from projflow.models import Discrepancy, VerificationMode, VerificationReport

logger = logging.getLogger(__name__)

DEFAULT_SERIES_ORDER = 8
DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 64
SAMPLE_BOX = (0.05, 0.4)
TIME_BOX = (0.01, 0.1)


def _variables_for(exprs: Sequence[Expr], variables: Sequence[Symbol] | None) -> tuple[Symbol, ...]:
    if variables is not None:
        return tuple(variables)
    names = {s.name for e in exprs for s in e.free_symbols}
    return default_variables(len(exprs), names)


def _check_free(exprs: Sequence[Expr], variables: Sequence[Symbol]) -> None:
    extra = {s for e in exprs for s in e.free_symbols} - set(variables)
    if extra:
        names = ", ".join(s.name for s in sort_symbols(extra))
        raise DomainError(f"{names} not among the coordinates {tuple(v.name for v in variables)}")


class NumericFlow(Protocol):
    """Anything that maps coordinate arrays to component arrays."""

    dim: int

    def __call__(self, *coords: ArrayLike) -> list[NDArray[np.float64]]: ...


class SupportsNumeric(Protocol):
    @property
    def dim(self) -> int: ...

    def numeric(self) -> NumericFlow: ...


@dataclass(frozen=True)
class CompiledFlow:
    """Vectorized evaluator of a closed-form flow."""

    functions: tuple[NumericFunction, ...]
    min_base: list[float] = field(default_factory=lambda: [np.inf], compare=False)

    @property
    def dim(self) -> int:
        return len(self.functions)

    def __call__(self, *coords: ArrayLike) -> list[NDArray[np.float64]]:
        values = []
        for fn in self.functions:
            value, min_base = fn.evaluate(*coords)
            self.min_base[0] = min(self.min_base[0], min_base)
            values.append(value)
        return values


@dataclass(frozen=True)
class FlowMap:
    """Candidate projective flow: closed-form components in the coordinate variables."""

    components: tuple[Expr, ...]
    variables: tuple[Symbol, ...]
    name: str | None = field(default=None, compare=False)

    @classmethod
    def of(
        cls,
        components: Sequence[object],
        variables: Sequence[Symbol] | None = None,
        name: str | None = None,
    ) -> FlowMap:
        exprs = tuple(check_closed_form(as_expr(c)) for c in components)
        variables = _variables_for(exprs, variables)
        if len(variables) != len(exprs):
            raise DomainError(f"{len(exprs)} components for {len(variables)} coordinates")
        _check_free(exprs, variables)
        return cls(exprs, variables, name)

    @classmethod
    def identity(cls, variables: Sequence[Symbol]) -> FlowMap:
        return cls(tuple(variables), tuple(variables), "identity")

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def is_rational(self) -> bool:
        return all(is_rational_expr(c, self.variables) for c in self.components)

    def ratfuncs(self) -> tuple[RatFunc, ...]:
        if not self.is_rational:
            raise NotRationalError(f"flow {self.label} has non-rational components")
        return ratfuncs(self.components, self.variables)

    @property
    def label(self) -> str:
        return self.name or "(" + ", ".join(format_tuple(self.components)) + ")"

    def __call__(self, *values: object) -> tuple[Expr, ...]:
        """Components evaluated at a tuple of expressions (composition)."""
        if len(values) != self.dim:
            raise DomainError(f"expected {self.dim} arguments, got {len(values)}")
        bindings = dict(zip(self.variables, values))
        return tuple(substitute(c, bindings) for c in self.components)

    def compose(self, inner: FlowMap) -> FlowMap:
        """self after inner, i.e. x -> self(inner(x))."""
        if inner.variables != self.variables:
            inner = inner.rename(self.variables)
        if self.is_rational and inner.is_rational:
            values = inner.ratfuncs()
            return FlowMap(
                tuple(r.compose(values, self.variables).as_expr() for r in self.ratfuncs()),
                self.variables,
            )
        return FlowMap(tuple(tidy(v) for v in self(*inner.components)), self.variables)

    def rename(self, variables: Sequence[Symbol]) -> FlowMap:
        mapping = dict(zip(self.variables, variables))
        return FlowMap(
            tuple(c.xreplace(mapping) for c in self.components), tuple(variables), self.name
        )

    def canonical(self) -> FlowMap:
        """Rational components in canonical form; closed forms tidied."""
        if self.is_rational:
            values = tuple(r.as_expr() for r in self.ratfuncs())
        else:
            values = tuple(tidy(c) for c in self.components)
        return FlowMap(values, self.variables, self.name)

    def equals(self, other: FlowMap) -> bool:
        if other.variables != self.variables:
            other = other.rename(self.variables)
        if self.is_rational and other.is_rational:
            return self.ratfuncs() == other.ratfuncs()
        return all(is_zero(a - b) for a, b in zip(self.components, other.components))

    def numeric(self) -> CompiledFlow:
        return CompiledFlow(tuple(compile_numeric(c, self.variables) for c in self.components))

    def with_name(self, name: str) -> FlowMap:
        return FlowMap(self.components, self.variables, name)

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {"flow": format_tuple(self.components)}
        if self.name:
            result["name"] = self.name
        return result


@dataclass(frozen=True)
class VectorField:
    """Tuple of 2-homogeneous rational functions."""

    components: tuple[RatFunc, ...]
    name: str | None = field(default=None, compare=False)

    @classmethod
    def of(
        cls,
        components: Sequence[object],
        variables: Sequence[Symbol] | None = None,
        name: str | None = None,
    ) -> VectorField:
        exprs = tuple(as_expr(c) for c in components)
        variables = _variables_for(exprs, variables)
        if len(variables) != len(exprs):
            raise DomainError(f"{len(exprs)} components for {len(variables)} coordinates")
        _check_free(exprs, variables)
        values = ratfuncs(exprs, variables)
        for idx, value in enumerate(values):
            if value.is_zero:
                continue
            degree = homogeneity_degree(value.as_expr(), variables)
            if degree != 2:
                raise DomainError(
                    f"component {idx + 1} of the vector field is not 2-homogeneous: {value}"
                )
        return cls(values, name)

    @classmethod
    def zero(cls, variables: Sequence[Symbol]) -> VectorField:
        return cls(tuple(RatFunc.constant(0, variables) for _ in variables))

    @property
    def variables(self) -> tuple[Symbol, ...]:
        return self.components[0].gens

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def exprs(self) -> tuple[Expr, ...]:
        return tuple(c.as_expr() for c in self.components)

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def __getitem__(self, idx: int) -> RatFunc:
        return self.components[idx]

    def cross(self) -> RatFunc:
        """x·rho - y·varpi for a plane field."""
        if self.dim != 2:
            raise DomainError("cross term needs a plane vector field")
        x, y = self.variables
        return self.components[1] * x - self.components[0] * y

    def divergence(self) -> RatFunc:
        total = RatFunc.constant(0, self.variables)
        for comp, var in zip(self.components, self.variables):
            total = total + comp.diff(var)
        return total

    def rename(self, variables: Sequence[Symbol]) -> VectorField:
        mapping = dict(zip(self.variables, variables))
        return VectorField(
            tuple(RatFunc.from_expr(e.xreplace(mapping), variables) for e in self.exprs),
            self.name,
        )

    def scaled(self, factor: object) -> VectorField:
        return VectorField(tuple(c * as_expr(factor) for c in self.components), self.name)

    def numeric(self) -> tuple[tuple[NumericFunction, ...], tuple[NumericFunction, ...]]:
        """Compiled components and their denominators (for the singularity guard)."""
        values = tuple(compile_numeric(e, self.variables) for e in self.exprs)
        dens = tuple(compile_numeric(c.den.as_expr(), self.variables) for c in self.components)
        return values, dens

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {"vf": format_tuple(self.exprs)}
        if self.name:
            result["name"] = self.name
        return result


FlowLike = Union[FlowMap, SupportsNumeric]


def shift_parameter(flow: FlowMap, name: str = "z") -> Symbol:
    """Time symbol named name unless that collides with a coordinate."""
    candidate = symbol(name)
    return time_symbol(name) if candidate in flow.variables else candidate


def time_shift(flow: FlowMap, parameter: Symbol | str | Expr = "z") -> tuple[Expr, ...]:
    """phi^z(x) = z^(-1)·phi(x z), canonical when phi is rational."""
    t = shift_parameter(flow, parameter) if isinstance(parameter, str) else as_expr(parameter)
    scaled = {v: v * t for v in flow.variables}
    shifted = [c.xreplace(scaled) / t for c in flow.components]
    if flow.is_rational:
        gens = flow.variables + tuple(sort_symbols(t.free_symbols - set(flow.variables)))
        return tuple(RatFunc.from_expr(s, gens).as_expr() for s in shifted)
    return tuple(tidy(s) for s in shifted)


def _rational_shift(flow: FlowMap, t: Symbol) -> tuple[RatFunc, ...]:
    gens = flow.variables + (t,)
    return tuple(RatFunc.from_expr(s, gens) for s in time_shift(flow, t))


def _boundary_discrepancy(flow: FlowMap) -> Discrepancy | None:
    t = shift_parameter(flow)
    try:
        if flow.is_rational:
            for idx, (var, shifted) in enumerate(zip(flow.variables, _rational_shift(flow, t))):
                at_zero = shifted.subs({t: 0}, flow.variables)
                if at_zero != var:
                    return Discrepancy(
                        f"boundary, component {idx + 1}", format_expr(at_zero), var.name
                    )
            return None
        for idx, (var, series) in enumerate(
            zip(flow.variables, shifted_series(flow.components, flow.variables, t, 1))
        ):
            polar = series.polar_part()
            polar.update(series.ramified_part())
            if polar:
                k = min(polar)
                return Discrepancy(
                    f"boundary, component {idx + 1}", f"{format_expr(polar[k])}*{t}^({k})", "0"
                )
            if not is_zero(series.coefficient(0) - var):
                return Discrepancy(
                    f"boundary, component {idx + 1}",
                    format_expr(series.coefficient(0)),
                    var.name,
                )
        return None
    except (DomainError, PrecisionLost) as e:
        return Discrepancy("boundary", str(e), "finite limit")


def verify_boundary(flow: FlowMap) -> bool:
    """z^(-1)·phi(x z) -> x as z -> 0, componentwise."""
    discrepancy = _boundary_discrepancy(flow)
    if discrepancy is not None:
        logger.debug(f"boundary fails for {flow.label}: {discrepancy}")
    return discrepancy is None


def vector_field(flow: FlowMap) -> VectorField:
    """The z-linear coefficient of the time shift."""
    discrepancy = _boundary_discrepancy(flow)
    if discrepancy is not None:
        raise DomainError(
            f"boundary condition fails for {flow.label} at {discrepancy.location}: "
            f"{discrepancy.lhs} instead of {discrepancy.rhs}"
        )
    t = shift_parameter(flow)
    if flow.is_rational:
        comps = [s.diff(t).subs({t: 0}, flow.variables) for s in _rational_shift(flow, t)]
    else:
        comps = [
            s.coefficient(1) for s in shifted_series(flow.components, flow.variables, t, 2)
        ]
    return VectorField.of(comps, flow.variables)


@dataclass(frozen=True)
class SeriesFlow:
    """Coefficients of z^0..z^(K-1) of each component of the formal flow."""

    order: int
    coefficients: tuple[tuple[Expr, ...], ...]
    variables: tuple[Symbol, ...]

    def component(self, idx: int, parameter: Symbol) -> Expr:
        return sympy.Add(*[c * parameter**k for k, c in enumerate(self.coefficients[idx])])

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "coefficients": [format_tuple(c) for c in self.coefficients],
        }


def series_flow(field_: VectorField, order: int) -> SeriesFlow:
    """
    Formal solution of X' = V(X), X(0) = x through z^(order-1).

    Uses (k+1)·X_(k+1) = [V(X(z))]_k; the coefficient of z^k only depends
    on X through z^k.
    """
    if order < 1:
        raise DomainError(f"series order must be at least 1, got {order}")
    t = time_symbol("z")
    variables = field_.variables
    coefficients: list[list[Expr]] = [[v] for v in variables]
    for k in range(order - 1):
        truncated = {
            v: sympy.Add(*[c * t**j for j, c in enumerate(coeffs)])
            for v, coeffs in zip(variables, coefficients)
        }
        step = []
        for comp in field_.components:
            composed = comp.as_expr().xreplace(truncated)
            step.append(tidy(expand_series(composed, t, k + 1).coefficient(k) / (k + 1)))
        for coeffs, value in zip(coefficients, step):
            coeffs.append(value)
        logger.debug(f"series flow order {k + 2} reached")
    return SeriesFlow(order, tuple(tuple(c) for c in coefficients), variables)


def _report(
    mode: VerificationMode, passed: bool, extent: int, discrepancy: Discrepancy | None = None
) -> VerificationReport:
    return VerificationReport(mode, passed, extent, None if passed else discrepancy)


def _verify_exact(flow: FlowMap) -> VerificationReport:
    mode = VerificationMode.EXACT
    if not flow.is_rational:
        raise NotRationalError(f"exact verification needs a rational flow, got {flow.label}")
    boundary = _boundary_discrepancy(flow)
    if boundary is not None:
        return _report(mode, False, 0, boundary)
    s, t = time_symbol("s"), time_symbol("t")
    gens = flow.variables + (s, t)
    inner = _rational_shift(flow, s)
    outer = _rational_shift(flow, t)
    joint = ratfuncs(time_shift(flow, s + t), gens)
    for idx, (o, rhs) in enumerate(zip(outer, joint)):
        try:
            num, den = composition_parts(o, (*inner, t), gens)
        except DomainError as e:
            found = Discrepancy(f"component {idx + 1}", str(e), format_expr(rhs))
            return _report(mode, False, 0, found)
        # cross-multiplied comparison of cleared denominators
        if not (num * rhs.den - rhs.num * den).is_zero:
            lhs = RatFunc.from_polys(num, den)
            return _report(
                mode,
                False,
                0,
                Discrepancy(f"component {idx + 1}", format_expr(lhs), format_expr(rhs)),
            )
    return _report(mode, True, 0)


def _verify_series(flow: FlowMap, order: int) -> VerificationReport:
    mode = VerificationMode.SERIES
    boundary = _boundary_discrepancy(flow)
    if boundary is not None:
        return _report(mode, False, order, boundary)
    t = shift_parameter(flow)
    try:
        shifted = shifted_series(flow.components, flow.variables, t, order)
        field_ = VectorField.of([s.coefficient(1) for s in shifted], flow.variables)
    except DomainError as e:
        return _report(mode, False, order, Discrepancy("vector field", str(e), "rational field"))
    expected = series_flow(field_, order)
    for idx, (series, coeffs) in enumerate(zip(shifted, expected.coefficients)):
        for k, coefficient in enumerate(coeffs):
            actual = series.coefficient(k)
            if not is_zero(actual - coefficient):
                return _report(
                    mode,
                    False,
                    order,
                    Discrepancy(
                        f"component {idx + 1}, z^{k}", format_expr(actual), format_expr(coefficient)
                    ),
                )
    return _report(mode, True, order)


def sample_points(
    dim: int, samples: int, seed: int, box: tuple[float, float] = SAMPLE_BOX
) -> NDArray[np.float64]:
    rng = np.random.default_rng(seed)
    return rng.uniform(box[0], box[1], size=(dim, samples))


def shifted_numeric(
    flow: NumericFlow, z: NDArray[np.float64], coords: Sequence[NDArray[np.float64]]
) -> list[NDArray[np.float64]]:
    """phi^z at arrays of points."""
    values = flow(*[np.asarray(c) * z for c in coords])
    return [np.asarray(v) / z for v in values]


def first_mismatch(
    lhs: Sequence[NDArray[np.float64]], rhs: Sequence[NDArray[np.float64]], tol: float
) -> Discrepancy | None:
    for idx, (a, b) in enumerate(zip(lhs, rhs)):
        err = np.abs(a - b) / np.maximum(1.0, np.abs(b))
        bad = np.flatnonzero(~(err <= tol))
        if bad.size:
            j = int(bad[0])
            location = f"sample {j}, component {idx + 1}"
            return Discrepancy(location, repr(float(a[j])), repr(float(b[j])))
    return None


def _verify_numeric(
    flow: SupportsNumeric, tol: float, samples: int, seed: int
) -> VerificationReport:
    compiled = flow.numeric()
    points = sample_points(flow.dim, samples, seed)
    rng = np.random.default_rng(seed + 1)
    z = rng.uniform(*TIME_BOX, size=samples)
    w = rng.uniform(*TIME_BOX, size=samples)
    inner = shifted_numeric(compiled, z, list(points))
    lhs = shifted_numeric(compiled, w, inner)
    rhs = shifted_numeric(compiled, z + w, list(points))
    discrepancy = first_mismatch(lhs, rhs, tol)
    return _report(VerificationMode.NUMERIC, discrepancy is None, samples, discrepancy)


def verify_translation(
    flow: FlowLike,
    mode: VerificationMode | str = VerificationMode.EXACT,
    order: int = DEFAULT_SERIES_ORDER,
    tol: float = DEFAULT_TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> VerificationReport:
    """
    Check phi^w(phi^z(x)) = phi^(z+w)(x).

    exact compares canonical rational functions; series compares the
    expansion of the time shift with the formal flow of its own vector
    field through z^(order-1); numeric samples small positive z, w at
    points of the positive box.
    """
    mode = VerificationMode(mode)
    if mode is VerificationMode.NUMERIC:
        report = _verify_numeric(flow, tol, samples, seed)
    elif not isinstance(flow, FlowMap):
        raise DomainError(f"{mode.value} verification needs a closed-form flow")
    elif mode is VerificationMode.EXACT:
        report = _verify_exact(flow)
    else:
        report = _verify_series(flow, order)
    logger.info(f"translation equation ({mode.value}): {'pass' if report.passed else 'fail'}")
    return report


def pde_residuals(flow: FlowMap, field_: VectorField) -> tuple[Expr, ...]:
    """sum_j u_(x_j)·(V_j - x_j) + u for every component u."""
    if flow.dim != field_.dim:
        raise DomainError(f"flow has dimension {flow.dim}, field {field_.dim}")
    field_ = field_.rename(flow.variables)
    residuals = []
    for u in flow.components:
        total = u
        for var, comp in zip(flow.variables, field_.exprs):
            total = total + diff(u, var) * (comp - var)
        residuals.append(total)
    return tuple(residuals)


def verify_pde(
    flow: FlowMap,
    field_: VectorField,
    mode: VerificationMode | str | None = None,
    tol: float = DEFAULT_TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> VerificationReport:
    """Exact for rational flows by default, sampled otherwise."""
    residuals = pde_residuals(flow, field_)
    if mode is None:
        mode = VerificationMode.EXACT if flow.is_rational else VerificationMode.NUMERIC
    mode = VerificationMode(mode)
    if mode is VerificationMode.NUMERIC:
        points = list(sample_points(flow.dim, samples, seed))
        zeros = [np.zeros(samples)] * flow.dim
        values = [compile_numeric(r, flow.variables)(*points) for r in residuals]
        scale = [compile_numeric(u, flow.variables)(*points) for u in flow.components]
        errors = [v / np.maximum(1.0, np.abs(s)) for v, s in zip(values, scale)]
        discrepancy = first_mismatch(errors, zeros, tol)
        return _report(mode, discrepancy is None, samples, discrepancy)
    for idx, residual in enumerate(residuals):
        if not is_zero(residual):
            return _report(
                mode,
                False,
                0,
                Discrepancy(f"component {idx + 1}", format_expr(tidy(residual)), "0"),
            )
    return _report(mode, True, 0)


def level0_flow(J: RatFunc | Expr, variables: Sequence[Symbol]) -> FlowMap:
    """x_i / (1 - J(x)) for every coordinate."""
    j = as_expr(J)
    comps = [v / (1 - j) for v in variables]
    return FlowMap.of([tidy(c) for c in comps], variables)


def level0_detect(field_: VectorField) -> tuple[RatFunc, FlowMap] | None:
    """J = varpi/x and the flow x/(1-J), y/(1-J) when x·rho - y·varpi vanishes."""
    if field_.dim != 2:
        raise DomainError("level0_detect needs a plane vector field")
    if not field_.cross().is_zero:
        return None
    x, _ = field_.variables
    J = field_.components[0] / x
    return J, level0_flow(J, field_.variables)
