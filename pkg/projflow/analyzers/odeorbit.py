"""
The univariate ODE of a plane vector field and the orbits it determines.

For a field varpi • rho write A(x) = rho(x, 1) and B(x) = x·rho(x, 1) - varpi(x, 1).
The fundamental equation is f·A + f'·B = rhs with rhs = ±1. Its
homogeneous part has algebraic solutions exactly when -A/B has simple
poles with a common rational residue at the roots of each irreducible
factor; then every solution is r + sigma·q^(1/N) with r, q rational.

Supports:
- Building the ODE from a field and the field back from (r, q, N)
- The radical solution search (homogeneous step, then a linear ansatz)
- Orbit integrals W(x, y) = y^N / q(x/y) and their verification
- Univariate flows U(x, y) • y/(y+1) defined by W(U, y/(y+1)) = W(x, y)
- Verification of the implicit system W(phi) = W, F(phi) = F - rhs
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
import sympy
from sympy import QQ, Expr, Poly, Rational, Symbol
from sympy.polys.matrices import DomainMatrix

from projflow.algebra.evaluate import compile_numeric
from projflow.algebra.expr import (
    as_expr,
    diff,
    homogeneity_degree,
    is_rational_expr,
    is_zero,
    substitute,
    symbols,
    tidy,
)
from projflow.algebra.partial import partial_fractions
from projflow.algebra.printer import format_expr
from projflow.algebra.ratfunc import RatFunc
from projflow.errors import DomainError
from projflow.flows.algebraic import AlgebraicEquation
from projflow.flows.core import (
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    TIME_BOX,
    FlowMap,
    SupportsNumeric,
    VectorField,
    sample_points,
    shifted_numeric,
)
from projflow.models import (
    Discrepancy,
    Verdict,
    VerdictResult,
    VerificationMode,
    VerificationReport,
)

logger = logging.getLogger(__name__)

X, Y = symbols("xy")
UNKNOWN = sympy.Symbol("U", positive=True)


def _univariate(value: RatFunc | Expr | int) -> RatFunc:
    if isinstance(value, RatFunc):
        return value.with_gens((X,))
    return RatFunc.from_expr(as_expr(value), (X,))


def _check_rhs(rhs: int) -> int:
    if rhs not in (1, -1):
        raise DomainError(f"rhs must be +1 or -1, got {rhs}")
    return int(rhs)


def homogenize(f: RatFunc, degree: int) -> RatFunc:
    """y^degree·f(x/y) as a rational function of (x, y)."""
    return RatFunc.from_expr(Y**degree * f.as_expr().xreplace({X: X / Y}), (X, Y))


@dataclass(frozen=True)
class FundamentalOde:
    """f·A + f'·B = rhs."""

    A: RatFunc
    B: RatFunc
    rhs: int = 1

    def residual(self, f: RatFunc | Expr) -> RatFunc:
        g = _univariate(f)
        return g * self.A + g.diff(X) * self.B - self.rhs

    def homogeneous_residual(self, q: RatFunc, N: int) -> RatFunc:
        return q * self.A * N + q.diff(X) * self.B

    def to_dict(self) -> dict[str, Any]:
        return {
            "A": format_expr(self.A.as_expr()),
            "B": format_expr(self.B.as_expr()),
            "rhs": self.rhs,
        }


@dataclass(frozen=True)
class OdeSolution:
    """General solution r + sigma·q^(1/N)."""

    r: RatFunc
    q: RatFunc
    N: int
    rhs: int = 1

    def general(self, sigma: object) -> Expr:
        return self.r.as_expr() + as_expr(sigma) * self.q.as_expr() ** Rational(1, self.N)

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": format_expr(self.r.as_expr()),
            "q": format_expr(self.q.as_expr()),
            "N": self.N,
            "rhs": self.rhs,
        }


@dataclass(frozen=True)
class OrbitIntegral:
    """W constant along orbits, homogeneous of degree N."""

    W: Expr
    degree: Rational
    variables: tuple[Symbol, ...] = (X, Y)

    @classmethod
    def of(cls, W: object, variables: Sequence[Symbol] = (X, Y)) -> OrbitIntegral:
        expr = as_expr(W)
        variables = tuple(variables)
        if is_rational_expr(expr, variables):
            expr = RatFunc.from_expr(expr, variables).as_expr()
        degree = homogeneity_degree(expr, variables)
        if degree is None:
            raise DomainError(f"W = {expr} is not homogeneous")
        return cls(expr, degree, variables)

    @property
    def is_rational(self) -> bool:
        return is_rational_expr(self.W, self.variables)

    def to_dict(self) -> dict[str, Any]:
        degree = int(self.degree) if self.degree.is_Integer else str(self.degree)
        return {"W": format_expr(self.W), "N": degree}


OdeResult = Union[OdeSolution, VerdictResult]


def fundamental_ode(field_: VectorField, rhs: int = 1) -> FundamentalOde:
    """A = rho(x, 1), B = x·rho(x, 1) - varpi(x, 1)."""
    if field_.dim != 2:
        raise DomainError("the fundamental ODE needs a plane vector field")
    if field_.cross().is_zero:
        raise DomainError("x·rho - y·varpi vanishes: the field has level 0, use level0_detect")
    x, y = field_.variables
    varpi, rho = (c.subs({x: X, y: 1}, (X,)) for c in field_.components)
    return FundamentalOde(rho, rho * X - varpi, _check_rhs(rhs))


def homogeneous_solution(ode: FundamentalOde) -> tuple[RatFunc, int] | VerdictResult:
    """(q, N) with N·q·A + q'·B = 0, q monic, N minimal."""
    ratio = -ode.A / ode.B
    if ratio.is_zero:
        return RatFunc.constant(1, (X,)), 1
    decomposition = partial_fractions(ratio)
    if not decomposition.poly_part.is_zero:
        return VerdictResult(
            Verdict.NON_ALGEBRAIC_HOMOGENEOUS,
            f"-A/B has polynomial part {decomposition.poly_part.as_expr()}",
        )
    exponents: list[tuple[Poly, Rational]] = []
    for term in decomposition.terms:
        if not term.is_simple:
            return VerdictResult(
                Verdict.NON_ALGEBRAIC_HOMOGENEOUS,
                f"pole of order {term.multiplicity} at {term.factor.as_expr()}",
            )
        if term.residue is None or not term.residue.common:
            return VerdictResult(
                Verdict.NON_ALGEBRAIC_HOMOGENEOUS,
                f"residues at the roots of {term.factor.as_expr()} are not one rational number",
            )
        exponents.append((term.factor, term.residue.residue))
    N = int(sympy.ilcm(1, *[e.q for _, e in exponents]))
    q = RatFunc.constant(1, (X,))
    for factor, e in exponents:
        power = int(N * e)
        if power:
            q = q * RatFunc.from_polys(factor, Poly(1, X, domain=QQ)) ** power
    logger.debug(f"homogeneous solution q = {q}, N = {N}")
    return q, N


def default_max_deg(ode: FundamentalOde) -> int:
    return 2 * (ode.A.den.degree() + ode.B.den.degree()) + 4


def _signed_factors(f: RatFunc) -> dict[Poly, int]:
    exponents: dict[Poly, int] = {}
    for poly, sign in ((f.num, 1), (f.den, -1)):
        for factor, mult in poly.factor_list()[1]:
            key = factor.monic()
            exponents[key] = exponents.get(key, 0) + sign * mult
    return exponents


def particular_solution(
    ode: FundamentalOde, q: RatFunc, max_deg: int
) -> RatFunc | None:
    """
    Rational r with r·A + r'·B = rhs from a linear ansatz R/D.

    D collects the factors of the leading coefficient b of the polynomial
    form a·f + b·f' = rhs·L and those of q; deg R <= deg D + max_deg. Free
    unknowns are set to zero with the unknowns ordered by increasing degree.
    """
    L = ode.A.den.lcm(ode.B.den)
    a = ode.A.num * L.exquo(ode.A.den)
    b = ode.B.num * L.exquo(ode.B.den)

    leading = {factor.monic(): mult for factor, mult in b.factor_list()[1]}
    for factor in _signed_factors(q):
        leading.setdefault(factor, 0)
    q_exponents = _signed_factors(q)
    D = Poly(1, X, domain=QQ)
    for factor, mult in leading.items():
        D = D * factor ** (mult + abs(q_exponents.get(factor, 0)))

    size = D.degree() + max_deg + 1
    target = L * D * D * ode.rhs
    D_prime = D.diff(X)
    columns = []
    for j in range(size):
        monomial = Poly(X**j, X, domain=QQ)
        columns.append(a * monomial * D + b * (monomial.diff(X) * D - monomial * D_prime))
    height = max([c.degree() for c in columns] + [target.degree()]) + 1

    def coefficient(p: Poly, k: int) -> Rational:
        return p.coeff_monomial(X**k) if k <= p.degree() else Rational(0)

    rows = [
        [coefficient(c, k) for c in columns] + [coefficient(target, k)] for k in range(height)
    ]
    logger.debug(f"ansatz with {size} unknowns and {height} equations")
    matrix = DomainMatrix.from_list_sympy(height, size + 1, rows).convert_to(QQ)
    reduced, pivots = matrix.rref()
    if size in pivots:
        return None
    values = reduced.to_Matrix()
    solution = [Rational(0)] * size
    for row, col in enumerate(pivots):
        solution[col] = values[row, size]
    numerator = Poly(sum(c * X**j for j, c in enumerate(solution)), X, domain=QQ)
    return RatFunc.from_polys(numerator, D)


def solve_ode_radical(
    ode: FundamentalOde, max_deg: int | None = None
) -> OdeResult:
    """General solution r + sigma·q^(1/N), or the verdict explaining its absence."""
    if max_deg is None:
        max_deg = default_max_deg(ode)
    if max_deg < 0:
        raise DomainError(f"degree bound must be nonnegative, got {max_deg}")
    homogeneous = homogeneous_solution(ode)
    if isinstance(homogeneous, VerdictResult):
        logger.info(f"no radical homogeneous solution: {homogeneous.detail}")
        return homogeneous
    q, N = homogeneous
    r = particular_solution(ode, q, max_deg)
    if r is None:
        return VerdictResult(
            Verdict.NO_RATIONAL_PARTICULAR,
            f"no rational solution with numerator degree bound {max_deg}",
        )
    if not ode.residual(r).is_zero or not ode.homogeneous_residual(q, N).is_zero:
        raise DomainError("radical solution failed its own residual check")
    logger.info(f"radical solution r = {r}, q = {q}, N = {N}")
    return OdeSolution(r, q, N, ode.rhs)


def orbit_integral_from_q(q: RatFunc | Expr, N: int) -> OrbitIntegral:
    """W(x, y) = y^N / q(x/y)."""
    value = _univariate(q)
    if value.is_zero:
        raise DomainError("q must be nonzero")
    W = homogenize(1 / value, N)
    return OrbitIntegral(W.as_expr(), Rational(N), (X, Y))


def verify_orbit(integral: OrbitIntegral, field_: VectorField) -> bool:
    """W_x·varpi + W_y·rho = 0."""
    if field_.dim != 2:
        raise DomainError("orbit verification needs a plane vector field")
    field_ = field_.rename(integral.variables)
    x, y = integral.variables
    varpi, rho = field_.exprs
    return is_zero(diff(integral.W, x) * varpi + diff(integral.W, y) * rho)


def orbit_integral(field_: VectorField, rhs: int = 1) -> OrbitIntegral | VerdictResult:
    """An orbit integral of a plane field: x/y at level 0, else from its ODE."""
    if field_.dim != 2:
        raise DomainError("orbit integrals are computed for plane fields")
    if field_.cross().is_zero:
        x, y = field_.variables
        return OrbitIntegral.of(x / y, field_.variables)
    homogeneous = homogeneous_solution(fundamental_ode(field_, rhs))
    if isinstance(homogeneous, VerdictResult):
        return homogeneous
    return orbit_integral_from_q(*homogeneous)


def vf_from_ode_data(
    r: RatFunc | Expr, q: RatFunc | Expr, N: int, rhs: int = 1
) -> VectorField:
    """Solve r·rho + r'·C = rhs, N·q·rho + q'·C = 0 with C = x·rho - varpi."""
    r, q = _univariate(r), _univariate(q)
    det = r * q.diff(X) - r.diff(X) * q * N
    if det.is_zero:
        raise DomainError("r·q' = N·r'·q: r is a multiple of q^(1/N) and fixes no field")
    rho = q.diff(X) * _check_rhs(rhs) / det
    C = -(q * N * rhs) / det
    varpi = rho * X - C
    return VectorField((homogenize(varpi, 2), homogenize(rho, 2)))


@dataclass(frozen=True)
class UnivariateConstruction:
    """A flow U • y/(y+1) from an orbit integral, with its vector field."""

    flow: FlowMap | AlgebraicEquation
    field: VectorField

    def to_dict(self) -> dict[str, Any]:
        return {**self.flow.to_dict(), **self.field.to_dict()}


def perfect_power_exponent(W: Expr, variables: Sequence[Symbol]) -> int:
    """Largest m with W = V^m for a rational V, up to a constant factor."""
    f = RatFunc.from_expr(W, variables)
    multiplicities = [m for poly in (f.num, f.den) for _, m in poly.factor_list()[1]]
    return math.gcd(*multiplicities)


def flow_from_integral_univariate(
    integral: OrbitIntegral, literal_square: bool = False
) -> UnivariateConstruction:
    """
    Solve W(U, y/(y+1)) = W(x, y) for U on the identity branch.

    The field is N·y·W/W_x - x·y • -y^2 (+y^2 with literal_square).
    """
    x, y = integral.variables
    W = integral.W
    W_x = diff(W, x)
    if is_zero(W_x):
        raise DomainError(f"W = {W} does not depend on {x}")
    if integral.is_rational and perfect_power_exponent(W, integral.variables) > 1:
        raise DomainError(f"W = {W} is a perfect power; take its root first")

    v = y / (y + 1)
    equation = AlgebraicEquation.of(
        substitute(W, {x: UNKNOWN, y: v}) - W, UNKNOWN, 0, (None, v), integral.variables
    )
    solution = equation.linear_solution()
    flow: FlowMap | AlgebraicEquation
    if solution is not None:
        flow = FlowMap.of((solution, v), integral.variables).canonical()
    else:
        logger.info(f"univariate flow of {format_expr(W)} is algebraic of degree {equation.degree}")
        flow = equation

    varpi = tidy(integral.degree * y * W / W_x - x * y)
    rho = y**2 if literal_square else -(y**2)
    return UnivariateConstruction(flow, VectorField.of((varpi, rho), integral.variables))


def _implicit_f(f: OdeSolution | RatFunc | Expr) -> tuple[Expr, int | None]:
    if isinstance(f, OdeSolution):
        return f.r.as_expr(), f.rhs
    return as_expr(f), None


def verify_implicit(
    flow: FlowMap | SupportsNumeric,
    f: OdeSolution | RatFunc | Expr,
    integral: OrbitIntegral,
    mode: VerificationMode | str | None = None,
    rhs: int = 1,
    tol: float = DEFAULT_TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    box: tuple[float, float] = (0.1, 0.5),
) -> VerificationReport:
    """
    W(u, v) = W(x, y) and (1/v)·f(u/v) = (1/y)·f(x/y) - rhs.

    Numeric mode checks the time-z form W(phi^z) = W, F(phi^z) = F - rhs·z
    with small z.
    """
    f_expr, solution_rhs = _implicit_f(f)
    rhs = _check_rhs(solution_rhs if solution_rhs is not None else rhs)
    x, y = integral.variables
    F = f_expr.xreplace({X: x / y}) / y
    rational = (
        isinstance(flow, FlowMap)
        and flow.is_rational
        and integral.is_rational
        and is_rational_expr(f_expr, (X,))
    )
    if mode is None:
        mode = VerificationMode.EXACT if rational else VerificationMode.NUMERIC
    mode = VerificationMode(mode)

    if mode is VerificationMode.EXACT:
        if not isinstance(flow, FlowMap):
            raise DomainError("exact implicit verification needs a closed-form flow")
        flow = flow.rename(integral.variables)
        image = dict(zip(integral.variables, flow.components))
        checks = (
            ("orbit equation", substitute(integral.W, image), integral.W),
            ("time equation", substitute(F, image), F - rhs),
        )
        for location, lhs, rhs_value in checks:
            if not is_zero(lhs - rhs_value):
                found = Discrepancy(location, format_expr(tidy(lhs)), format_expr(tidy(rhs_value)))
                return VerificationReport(mode, False, 0, found)
        return VerificationReport(mode, True, 0)

    compiled = flow.numeric()
    points = list(sample_points(2, samples, seed, box))
    z = np.random.default_rng(seed + 1).uniform(*TIME_BOX, size=samples)
    moved = shifted_numeric(compiled, z, points)
    W_fn = compile_numeric(integral.W, integral.variables)
    F_fn = compile_numeric(F, integral.variables)
    sides = (
        ("orbit equation", W_fn(*moved), W_fn(*points)),
        ("time equation", F_fn(*moved), F_fn(*points) - rhs * z),
    )
    for location, lhs, rhs_value in sides:
        err = np.abs(lhs - rhs_value) / np.maximum(1.0, np.abs(rhs_value))
        bad = np.flatnonzero(~(err <= tol))
        if bad.size:
            j = int(bad[0])
            found = Discrepancy(
                f"{location}, sample {j}", repr(float(lhs[j])), repr(float(rhs_value[j]))
            )
            return VerificationReport(mode, False, samples, found)
    return VerificationReport(mode, True, samples)
