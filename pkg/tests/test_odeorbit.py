"""
Tests for the fundamental ODE, orbit integrals and univariate flows.
"""

from __future__ import annotations

import random

import numpy as np
import pytest
import sympy
from sympy import Rational

from projflow.algebra.expr import is_zero, symbols
from projflow.algebra.ratfunc import RatFunc
from projflow.analyzers.odeorbit import (
    OdeSolution,
    OrbitIntegral,
    flow_from_integral_univariate,
    fundamental_ode,
    homogeneous_solution,
    orbit_integral,
    orbit_integral_from_q,
    solve_ode_radical,
    verify_implicit,
    verify_orbit,
    vf_from_ode_data,
)
from projflow.errors import DomainError
from projflow.flows.algebraic import AlgebraicEquation
from projflow.flows.catalog import catalog
from projflow.flows.core import FlowMap, VectorField, vector_field, verify_translation
from projflow.models import Verdict, VerdictResult, VerificationMode

x, y = symbols("xy")

QUINTIC = VectorField.of(
    (
        -x * (3 * x**5 + x**3 * y**2 + 2 * y**5) / (3 * (x**2 + y**2) ** 2),
        -y * (3 * y**5 + y**3 * x**2 + 2 * x**5) / (3 * (x**2 + y**2) ** 2),
    )
)
PRIMED = VectorField.of((-Rational(4, 3) * x * y + y**4 / (3 * x**2), -(y**2)))

# field, an orbit integral of it, and the integral's degree
INTEGRALS = {
    "quintic": (QUINTIC, x**3 * y**3 / (x**5 + x**3 * y**2 - x**2 * y**3 - y**5), 1),
    "primed": (PRIMED, y**4 / (x**3 - y**3), 1),
    "phi_3": (vector_field(catalog("phi_N", N=3)), x * y**2, 3),
}


def _poly(rng: random.Random, degree: int) -> object:
    while True:
        p = sum(rng.randint(-2, 2) * x**k for k in range(degree + 1))
        if p != 0:
            return p


class TestFundamentalOde:
    """Tests for fundamental_ode and solve_ode_radical."""

    def test_coefficients(self):
        ode = fundamental_ode(PRIMED)
        assert ode.A == -1
        assert ode.B == (x**3 - 1) / (3 * x**2)

    def test_quintic_solution(self):
        """r = -(x^2+1)/x^3, q = (x^5+x^3-x^2-1)/x^3, N = 1."""
        solution = solve_ode_radical(fundamental_ode(QUINTIC))
        assert isinstance(solution, OdeSolution)
        assert solution.N == 1
        assert solution.q == (x**5 + x**3 - x**2 - 1) / x**3
        assert solution.r == -(x**2 + 1) / x**3

    def test_primed_solution(self):
        ode = fundamental_ode(PRIMED)
        solution = solve_ode_radical(ode)
        assert isinstance(solution, OdeSolution)
        assert solution.q == x**3 - 1
        assert ode.residual(solution.r).is_zero

    def test_radical_level(self):
        """phi_3 has q^(1/3) in its general solution."""
        solution = solve_ode_radical(fundamental_ode(vector_field(catalog("phi_N", N=3))))
        assert isinstance(solution, OdeSolution)
        assert solution.N == 3

    def test_negative_rhs(self):
        solution = solve_ode_radical(fundamental_ode(QUINTIC, rhs=-1))
        assert isinstance(solution, OdeSolution)
        assert solution.rhs == -1
        assert solution.r == (x**2 + 1) / x**3

    def test_non_algebraic_homogeneous(self):
        """A polynomial part in -A/B rules out radical solutions."""
        field_ = VectorField.of((x**2 + x * y - y**2, x * y))
        result = solve_ode_radical(fundamental_ode(field_))
        assert isinstance(result, VerdictResult)
        assert result.verdict is Verdict.NON_ALGEBRAIC_HOMOGENEOUS

    def test_level0_rejected(self):
        with pytest.raises(DomainError, match="level 0"):
            fundamental_ode(VectorField.of((x * y, y**2)))

    def test_bad_rhs(self):
        with pytest.raises(DomainError):
            fundamental_ode(QUINTIC, rhs=2)

    @pytest.mark.parametrize("M", [-2, -1, 0, 1, 2, 3])
    @pytest.mark.parametrize("name", sorted(INTEGRALS))
    def test_powers_of_the_integral_solve_the_homogeneous_equation(self, name, M):
        """g = W(x, 1)^(-M) satisfies M·d·g·A + g'·B = 0."""
        field_, W, d = INTEGRALS[name]
        ode = fundamental_ode(field_)
        g = RatFunc.from_expr(W.xreplace({y: 1}), (x,)) ** (-M)
        assert (g * ode.A * (M * d) + g.diff(x) * ode.B).is_zero

    @pytest.mark.parametrize("name", sorted(INTEGRALS))
    def test_homogeneous_solution(self, name):
        field_, W, d = INTEGRALS[name]
        ode = fundamental_ode(field_)
        result = homogeneous_solution(ode)
        assert not isinstance(result, VerdictResult)
        q, N = result
        assert ode.homogeneous_residual(q, N).is_zero
        assert N == d
        assert q == 1 / W.xreplace({y: 1})

    def test_random_round_trips(self):
        """A field built from (r, q, N) gives back an equivalent solution."""
        rng = random.Random(3)
        done = 0
        while done < 20:
            r = _poly(rng, 3) / _poly(rng, 1)
            q = _poly(rng, 3) / _poly(rng, 1)
            N = rng.randint(1, 4)
            try:
                field_ = vf_from_ode_data(r, q, N)
            except DomainError:
                continue
            ode = fundamental_ode(field_)
            assert ode.residual(r).is_zero
            solution = solve_ode_radical(ode)
            assert isinstance(solution, OdeSolution), (r, q, N)
            ratio = solution.q**N / RatFunc.from_expr(q, (x,)) ** solution.N
            assert ratio.is_constant, (r, q, N)
            assert vf_from_ode_data(solution.r, solution.q, solution.N) == field_
            assert verify_orbit(orbit_integral_from_q(q, N), field_)
            done += 1


class TestOrbitIntegral:
    """Tests for orbit integrals."""

    def test_quintic(self):
        integral = orbit_integral(QUINTIC)
        expected = x**3 * y**3 / (x**5 + x**3 * y**2 - x**2 * y**3 - y**5)
        assert RatFunc.from_expr(integral.W, (x, y)) == expected
        assert verify_orbit(integral, QUINTIC)

    def test_primed(self):
        integral = orbit_integral(PRIMED)
        assert RatFunc.from_expr(integral.W, (x, y)) == y**4 / (x**3 - y**3)
        assert integral.degree == 1
        assert verify_orbit(OrbitIntegral.of(y**4 / (x**3 - y**3)), PRIMED)

    def test_from_q(self):
        """y^N / q(x/y) with q = 1/x and N = 3 is x·y^2."""
        integral = orbit_integral_from_q(1 / x, 3)
        assert is_zero(integral.W - x * y**2)
        assert integral.degree == 3

    def test_level0_integral(self):
        integral = orbit_integral(VectorField.of((x * (x + y), y * (x + y))))
        assert is_zero(integral.W - x / y)

    def test_wrong_integral(self):
        assert not verify_orbit(OrbitIntegral.of(x * y), PRIMED)

    def test_zero_q(self):
        with pytest.raises(DomainError):
            orbit_integral_from_q(0, 1)


class TestVfFromOdeData:
    """Tests for vf_from_ode_data."""

    def test_recovers_quintic(self):
        field_ = vf_from_ode_data(-(x**2 + 1) / x**3, (x**5 + x**3 - x**2 - 1) / x**3, 1)
        assert field_ == QUINTIC

    def test_round_trip(self):
        solution = solve_ode_radical(fundamental_ode(PRIMED))
        field_ = vf_from_ode_data(solution.r, solution.q, solution.N, solution.rhs)
        assert field_ == PRIMED

    def test_degenerate(self):
        with pytest.raises(DomainError):
            vf_from_ode_data(x**2 - 1, x**2 - 1, 1)


class TestUnivariateFlows:
    """Tests for flow_from_integral_univariate."""

    @pytest.mark.parametrize("sigma", [1, 2, Rational(-1, 3)])
    def test_linear_integral(self, sigma):
        """W = x + sigma·y gives U = (sigma·y^2 + xy + x)/(y+1)."""
        construction = flow_from_integral_univariate(OrbitIntegral.of(x + sigma * y))
        flow = construction.flow
        assert isinstance(flow, FlowMap)
        assert flow.equals(FlowMap.of(((sigma * y**2 + x * y + x) / (y + 1), y / (y + 1))))
        assert verify_translation(flow).passed
        assert vector_field(flow) == construction.field

    def test_cubic_integral_is_algebraic(self):
        construction = flow_from_integral_univariate(OrbitIntegral.of(y**4 / (x**3 - y**3)))
        assert isinstance(construction.flow, AlgebraicEquation)
        assert construction.flow.degree == 3
        assert construction.field == PRIMED

    def test_cubic_branch_matches_closed_form(self):
        construction = flow_from_integral_univariate(OrbitIntegral.of(y**4 / (x**3 - y**3)))
        xs = np.array([0.3, 0.2, 0.45, 0.1])
        ys = np.array([0.2, 0.35, 0.15, 0.4])
        u, v = construction.flow.numeric()(xs, ys)
        expected = np.cbrt(xs**3 + ys**4) / (ys + 1) ** (4 / 3)
        np.testing.assert_allclose(u, expected, rtol=1e-9)
        np.testing.assert_allclose(v, ys / (ys + 1), rtol=1e-12)

    def test_literal_square(self):
        construction = flow_from_integral_univariate(OrbitIntegral.of(x + y), literal_square=True)
        assert construction.field[1] == y**2

    def test_perfect_power_rejected(self):
        with pytest.raises(DomainError, match="perfect power"):
            flow_from_integral_univariate(OrbitIntegral.of((x + y) ** 2))

    def test_integral_without_x(self):
        with pytest.raises(DomainError):
            flow_from_integral_univariate(OrbitIntegral.of(y))

    def test_mobius_integral(self):
        """W = y^N (x + a·y)/(x + b·y) has a rational univariate flow."""
        rng = random.Random(9)
        for _ in range(5):
            a, b = rng.sample(range(-3, 4), 2)
            N = rng.randint(1, 4)
            W = y**N * (x + a * y) / (x + b * y)
            construction = flow_from_integral_univariate(OrbitIntegral.of(W))
            power = (x + a * y) * (y + 1) ** N
            U = (b * power - a * (x + b * y)) / ((x + b * y) - power) * y / (y + 1)
            assert isinstance(construction.flow, FlowMap)
            assert construction.flow.equals(FlowMap.of((U, y / (y + 1)))), (a, b, N)


class TestVerifyImplicit:
    """Tests for the implicit system W(phi) = W, F(phi) = F - rhs."""

    def test_exact(self):
        flow = FlowMap.of(((2 * y**2 + x * y + x) / (y + 1), y / (y + 1)))
        report = verify_implicit(flow, sympy.Integer(-1), OrbitIntegral.of(x + 2 * y))
        assert report.passed
        assert report.mode is VerificationMode.EXACT

    def test_wrong_sign(self):
        flow = FlowMap.of(((2 * y**2 + x * y + x) / (y + 1), y / (y + 1)))
        report = verify_implicit(flow, sympy.Integer(-1), OrbitIntegral.of(x + 2 * y), rhs=-1)
        assert not report.passed
        assert report.first_discrepancy.location == "time equation"

    def test_algebraic_flow_numeric(self):
        integral = OrbitIntegral.of(y**4 / (x**3 - y**3))
        construction = flow_from_integral_univariate(integral)
        solution = solve_ode_radical(fundamental_ode(construction.field))
        report = verify_implicit(construction.flow, solution, integral, tol=1e-9, samples=20)
        assert report.mode is VerificationMode.NUMERIC
        assert report.order_or_samples == 20
        assert report.passed
