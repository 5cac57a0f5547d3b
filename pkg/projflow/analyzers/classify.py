"""
Classification predicates and searches for plane flows.

Supports:
- Level computation and solenoidality
- Symmetry under the swap i0 = (y, x) and the involution i = (y^2/x, y),
  at the level of flows and of vector fields
- Transport of i0-symmetric flows to i-symmetric ones through l0
- Shared and orthogonal orbits
- The solenoidal normal-form search with linear witnesses
- Level-1 fields with vanishing second component
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
import sympy
from sympy import Expr, Matrix, Poly, Rational, Symbol

from projflow.algebra.expr import as_expr, is_zero, sort_symbols, symbols, tidy
from projflow.algebra.partial import partial_fractions
from projflow.algebra.printer import format_expr
from projflow.algebra.ratfunc import RatFunc
from projflow.analyzers.odeorbit import (
    OdeSolution,
    fundamental_ode,
    homogenize,
    solve_ode_radical,
)
from projflow.errors import DomainError
from projflow.flows.catalog import catalog
from projflow.flows.conjugation import (
    BirMap,
    BirMap1H,
    LinMap,
    conjugate_flow,
    conjugate_vf,
    conjugate_vf_linear,
    involution_i,
    l0_map,
    swap_map,
)
from projflow.flows.core import (
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    FlowMap,
    VectorField,
    first_mismatch,
    level0_flow,
    sample_points,
    vector_field,
)
from projflow.models import (
    ClassReport,
    Discrepancy,
    Verdict,
    VerdictResult,
    VerificationMode,
    VerificationReport,
)

logger = logging.getLogger(__name__)

X, Y = symbols("xy")


def _plane(field_: VectorField) -> VectorField:
    if field_.dim != 2:
        raise DomainError("plane vector field expected")
    return field_.rename((X, Y))


def is_solenoidal(field_: VectorField) -> bool:
    """Divergence vanishes identically."""
    return field_.divergence().is_zero


def level_of(field_: VectorField, max_deg: int | None = None) -> int | None:
    """0 when x·rho - y·varpi = 0, else the N of the radical solution, or None."""
    field_ = _plane(field_)
    if field_.cross().is_zero:
        return 0
    result = solve_ode_radical(fundamental_ode(field_), max_deg)
    if isinstance(result, OdeSolution):
        return result.N
    logger.debug(f"no level found: {result.detail}")
    return None


# -- symmetry ----------------------------------------------------------------


def _conjugation_report(
    flow: FlowMap, m: BirMap, tol: float, samples: int, seed: int
) -> VerificationReport:
    """m^(-1)∘phi∘m = phi, exactly for rational flows, sampled otherwise."""
    flow = flow.rename((X, Y))
    if flow.is_rational:
        conjugated = conjugate_flow(flow, m)
        for idx, (a, b) in enumerate(zip(conjugated.ratfuncs(), flow.ratfuncs())):
            if a != b:
                found = Discrepancy(f"component {idx + 1}", str(a), str(b))
                return VerificationReport(VerificationMode.EXACT, False, 0, found)
        return VerificationReport(VerificationMode.EXACT, True, 0)

    logger.warning(f"{flow.label} is not rational; checking symmetry numerically")
    forward = sympy.lambdify((X, Y), list(m.components), modules="numpy")
    backward = sympy.lambdify((X, Y), list(m.inverse().components), modules="numpy")
    compiled = flow.numeric()
    points = list(sample_points(2, samples, seed))
    inner = [np.asarray(v, dtype=float) for v in forward(*points)]
    middle = compiled(*inner)
    lhs = [np.asarray(v, dtype=float) for v in backward(*middle)]
    found = first_mismatch(lhs, compiled(*points), tol)
    return VerificationReport(VerificationMode.NUMERIC, found is None, samples, found)


def i0_symmetric(
    flow: FlowMap, tol: float = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> VerificationReport:
    """i0∘phi∘i0 = phi."""
    if flow.dim != 2:
        raise DomainError("symmetry is defined for plane flows")
    return _conjugation_report(flow, swap_map(), tol, samples, seed)


def i0_symmetric_vf(field_: VectorField) -> bool:
    """varpi(x, y) = rho(y, x)."""
    varpi, rho = _plane(field_).components
    return varpi == rho.subs({X: Y, Y: X}, (X, Y))


def i_symmetric(
    flow: FlowMap, tol: float = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> VerificationReport:
    """i∘phi∘i = phi with i = (y^2/x, y)."""
    if flow.dim != 2:
        raise DomainError("symmetry is defined for plane flows")
    return _conjugation_report(flow, involution_i(), tol, samples, seed)


def i_symmetric_vf(field_: VectorField) -> bool:
    """(2x/y)·rho(x, y) = varpi(x, y) + varpi(y, x)."""
    varpi, rho = _plane(field_).components
    swapped = varpi.subs({X: Y, Y: X}, (X, Y))
    return rho * (2 * X / Y) == varpi + swapped


def symmetric_level0(r: RatFunc | Expr) -> FlowMap:
    """The i-symmetric level-0 flow with J = y·r(x/y), for r(t) = r(1/t)."""
    expr = as_expr(r)
    free = sort_symbols(expr.free_symbols)
    if len(free) > 1:
        raise DomainError(f"r = {expr} must be univariate")
    t = free[0] if free else Symbol("t")
    if not is_zero(expr - expr.xreplace({t: 1 / t})):
        raise DomainError(f"r = {expr} is not invariant under t -> 1/t")
    J = RatFunc.from_expr(Y * expr.xreplace({t: X / Y}), (X, Y))
    return level0_flow(J, (X, Y))


def transport_symmetry(flow: FlowMap, s: BirMap1H | None = None) -> FlowMap:
    """s^(-1)∘l0^(-1)∘phi∘l0∘s for an i0-symmetric phi and symmetric s."""
    if not i0_symmetric(flow):
        raise DomainError(f"{flow.label} is not i0-symmetric")
    if s is None:
        s = BirMap1H.from_ratio(1, (X, Y))
    if not s.is_symmetric():
        raise DomainError(f"A = {s.A} is not symmetric in x and y")
    return conjugate_flow(flow.rename((X, Y)), l0_map().then(s))


# -- orbits ------------------------------------------------------------------


def shared_orbits(first: VectorField, second: VectorField) -> bool:
    """varpi1·rho2 - varpi2·rho1 = 0."""
    a, b = _plane(first), _plane(second)
    if a.is_zero or b.is_zero:
        raise DomainError("orbits of the zero field are points")
    return (a[0] * b[1] - b[0] * a[1]).is_zero


def orthogonal_orbits(first: VectorField, second: VectorField) -> bool:
    """varpi1·varpi2 + rho1·rho2 = 0."""
    a, b = _plane(first), _plane(second)
    return (a[0] * b[0] + a[1] * b[1]).is_zero


# -- solenoidal normal forms ---------------------------------------------------


@dataclass(frozen=True)
class QuadPair:
    """Univariate normal form varpi = U x^2 + V xy + W0 y^2, rho = -y^2."""

    U: Rational
    V: Rational
    W0: Rational

    @property
    def discriminant(self) -> Rational:
        return (self.V + 1) ** 2 - 4 * self.U * self.W0

    @property
    def level(self) -> int | None:
        """sqrt of the discriminant when it is a perfect square."""
        d = self.discriminant
        if d < 0:
            return None
        root = sympy.sqrt(d)
        return int(root) if root.is_Integer else None

    def field(self) -> VectorField:
        return VectorField.of((self.U * X**2 + self.V * X * Y + self.W0 * Y**2, -(Y**2)), (X, Y))

    def to_dict(self) -> dict[str, str]:
        return {"U": str(self.U), "V": str(self.V), "W": str(self.W0)}


def solenoidal_conjugator(pair: QuadPair) -> RatFunc | None:
    """
    A with x·A • y·A conjugating the pair's field into a solenoidal one.

    A(x, 1) = exp(int R) with R = (2Ux + V - 2)/(2(Ux^2 + (V+1)x + W0)); it is
    rational exactly when R has simple poles with integer residues.
    """
    R = RatFunc.from_expr(
        (2 * pair.U * X + pair.V - 2) / (2 * (pair.U * X**2 + (pair.V + 1) * X + pair.W0)), (X,)
    )
    A = RatFunc.constant(1, (X,))
    if not R.is_zero:
        decomposition = partial_fractions(R)
        if not decomposition.poly_part.is_zero:
            return None
        for term in decomposition.terms:
            residue = term.residue
            if not term.is_simple or residue is None or not residue.common:
                return None
            if not residue.residue.is_Integer:
                return None
            one = Poly(1, X, domain=term.factor.domain)
            A = A * RatFunc.from_polys(term.factor, one) ** int(residue.residue)
    return homogenize(A, 0)


def _cubic_factors(cross: RatFunc) -> list[tuple[Poly, int]] | None:
    if not cross.is_polynomial:
        return None
    _, factors = cross.num.factor_list()
    if any(f.total_degree() != 1 for f, _ in factors):
        return None
    return [(f, m) for f, m in factors]


def _align(factors: list[Poly]) -> Matrix:
    """L with factors[k](L x) proportional to the k-th coordinate."""
    rows = [[f.coeff_monomial(X), f.coeff_monomial(Y)] for f in factors]
    if len(rows) == 1:
        rows.append([0, 1] if rows[0][1] == 0 else [1, 0])
    return Matrix(rows).inv()


SPH_TO_CANONICAL = Matrix([[1, -1], [0, 1]])


def linear_witness(field_: VectorField, target: VectorField) -> LinMap | None:
    """L with L^(-1)·V(L x) = target for the two solenoidal classes, checked exactly."""
    factors = _cubic_factors(field_.cross())
    if factors is None:
        return None
    by_mult = {m: f for f, m in factors}
    if set(by_mult) == {3}:
        # cross = k·l^3: align l to x, giving 0 • k x^2
        L1 = _align([by_mult[3]])
        aligned = conjugate_vf_linear(field_, LinMap(L1, (X, Y)))
        k = tidy(aligned[1].as_expr() / X**2)
        if not k.is_Rational or k == 0:
            return None
        matrix = L1 * sympy.diag(1, k) * SPH_TO_CANONICAL
    elif set(by_mult) == {1, 2}:
        # cross ∝ x·y^2: simple root to x, double root to y
        L1 = _align([by_mult[1], by_mult[2]])
        aligned = conjugate_vf_linear(field_, LinMap(L1, (X, Y)))
        p = tidy(aligned[0].as_expr() / (X * Y))
        if not p.is_Rational or p == 0:
            return None
        matrix = L1 * sympy.diag(1, Rational(2) / p)
    else:
        return None
    L = LinMap(matrix, (X, Y))
    if conjugate_vf_linear(field_, L) != target.rename((X, Y)):
        return None
    return L


@dataclass(frozen=True)
class SolenoidalHit:
    """A level carrying a solenoidal representative, with its witnesses."""

    N: int
    pair: QuadPair
    conjugator: RatFunc
    field: VectorField
    target: str
    witness: LinMap | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "normal_form": self.pair.to_dict(),
            "A": format_expr(self.conjugator.as_expr()),
            "vf": [format_expr(e) for e in self.field.exprs],
            "target": self.target,
            "witness": self.witness.to_dict()["linear"] if self.witness else None,
        }


def _representatives(N: int) -> list[QuadPair]:
    return [
        QuadPair(Rational(0), Rational(N - 1), Rational(0)),
        QuadPair(Rational(0), Rational(-N - 1), Rational(0)),
        QuadPair(Rational(1), Rational(N - 1), Rational(0)),
    ]


TARGETS = {1: "phi_sph_inf", 3: "phi_N"}


def _target_field(N: int) -> VectorField:
    if N == 1:
        return vector_field(catalog("phi_sph_inf"))
    return vector_field(catalog("phi_N", N=3))


def solenoidal_search(N_max: int) -> list[SolenoidalHit]:
    """Levels up to N_max whose normal forms conjugate to solenoidal fields."""
    if N_max < 1:
        raise DomainError(f"N_max must be at least 1, got {N_max}")
    hits: list[SolenoidalHit] = []
    for N in range(1, N_max + 1):
        for pair in _representatives(N):
            A = solenoidal_conjugator(pair)
            if A is None:
                continue
            conjugated = conjugate_vf(pair.field(), BirMap1H(A))
            if not is_solenoidal(conjugated):
                raise DomainError(f"conjugator {A} of {pair} does not produce a solenoidal field")
            target = _target_field(N) if N in TARGETS else None
            witness = linear_witness(conjugated, target) if target is not None else None
            name = TARGETS.get(N, "unknown")
            hits.append(SolenoidalHit(N, pair, A, conjugated, name, witness))
            logger.info(f"solenoidal representative at level {N}: {conjugated.exprs}")
    return hits


# -- level 1 with rho = 0 ---------------------------------------------------------


@dataclass(frozen=True)
class Level1ZeroSecond:
    """varpi = sign·(a x + b y)^2 with its explicit flow."""

    a: Expr
    b: Expr
    sign: int
    flow: FlowMap

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": format_expr(self.a),
            "b": format_expr(self.b),
            "sign": self.sign,
            **self.flow.to_dict(),
        }


Level1Result = Union[Level1ZeroSecond, VerdictResult]


def level1_zero_second(field_: VectorField) -> Level1Result:
    """Decide whether varpi • 0 is (a x + b y)^2 • 0 and build its flow."""
    varpi, rho = _plane(field_).components
    if not rho.is_zero:
        raise DomainError("second component of the field must vanish")
    if varpi.is_zero or not varpi.is_polynomial:
        return VerdictResult(Verdict.NOT_PERFECT_SQUARE, f"varpi = {varpi} is not a quadratic form")
    poly = Poly(varpi.as_expr(), X, Y)
    p, q, r = (poly.coeff_monomial(m) for m in (X**2, X * Y, Y**2))
    if q**2 != 4 * p * r:
        return VerdictResult(Verdict.NOT_PERFECT_SQUARE, f"{varpi} is not a linear form squared")
    sign = 1 if (p if p != 0 else r) > 0 else -1
    if p != 0:
        a = sympy.sqrt(abs(p))
        b = sign * q / (2 * a)
        c = q / (2 * p)
        u = (X + c * Y) / (1 - (p * X + q * Y / 2)) - c * Y
    else:
        a, b = sympy.Integer(0), sympy.sqrt(abs(r))
        u = X + r * Y**2
    flow = FlowMap.of((RatFunc.from_expr(u, (X, Y)).as_expr(), Y), (X, Y))
    return Level1ZeroSecond(tidy(a), tidy(b), sign, flow)


# -- reports -------------------------------------------------------------------


def classify_field(field_: VectorField, max_deg: int | None = None) -> ClassReport:
    field_ = _plane(field_)
    return ClassReport(
        level=level_of(field_, max_deg),
        solenoidal=is_solenoidal(field_),
        i0_symmetric=i0_symmetric_vf(field_),
        i_symmetric=i_symmetric_vf(field_),
    )


def classify_flow(flow: FlowMap, max_deg: int | None = None) -> ClassReport:
    field_ = vector_field(flow)
    notes: list[str] = []
    level = level_of(field_, max_deg) if field_.dim == 2 else None
    i0 = i0_symmetric(flow)
    i = i_symmetric(flow)
    if i.mode is VerificationMode.NUMERIC:
        notes.append("symmetry checked numerically")
    return ClassReport(
        level=level,
        solenoidal=is_solenoidal(field_),
        i0_symmetric=i0.passed,
        i_symmetric=i.passed,
        mode=i.mode,
        notes=notes,
    )


__all__ = [
    "Level1ZeroSecond",
    "QuadPair",
    "SolenoidalHit",
    "classify_field",
    "classify_flow",
    "i0_symmetric",
    "i0_symmetric_vf",
    "i_symmetric",
    "i_symmetric_vf",
    "is_solenoidal",
    "level1_zero_second",
    "level_of",
    "linear_witness",
    "orthogonal_orbits",
    "shared_orbits",
    "solenoidal_conjugator",
    "solenoidal_search",
    "symmetric_level0",
    "transport_symmetry",
]
