"""
Tests for the exact algebra kernel.
"""

from __future__ import annotations

import math
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Poly, Rational

from projflow.algebra.evaluate import compile_numeric, eval_numeric
from projflow.algebra.expr import (
    diff,
    homogeneity_degree,
    is_homogeneous_of,
    is_zero,
    substitute,
    symbols,
)
from projflow.algebra.parser import parse_expr, parse_tuple, split_components
from projflow.algebra.partial import partial_fractions
from projflow.algebra.printer import format_expr
from projflow.algebra.ratfunc import RatFunc, normalize
from projflow.errors import (
    BranchError,
    DomainError,
    ExpressionSyntaxError,
    SingularityError,
    UnknownVariableError,
)

x, y, z, w = symbols("xyzw")


class TestParser:
    """Tests for parse_expr."""

    def test_product_with_power(self):
        assert parse_expr("x*(y+1)^2") == x * (y + 1) ** 2

    def test_rational_exponent(self):
        expr = parse_expr("(y+1)^(4/3)")
        assert expr.is_Pow
        assert expr.exp == Rational(4, 3)

    def test_negative_integer_exponent(self):
        assert parse_expr("x^-2") == x ** (-2)

    def test_double_star_synonym(self):
        assert parse_expr("x**3") == x**3

    def test_decimal_read_exactly(self):
        assert parse_expr("0.5*x") == x / 2

    def test_precedence(self):
        assert parse_expr("1 + 2*x^2/y - -y") == 1 + 2 * x**2 / y + y

    def test_unknown_variable_in_exponent(self):
        with pytest.raises(UnknownVariableError) as exc:
            parse_expr("x*(y+1)^(N-1)")
        assert exc.value.name == "N"
        assert exc.value.position == 9

    def test_syntax_error_position(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_expr("x*+)")
        assert exc.value.position == 3

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expr("(x+y")

    def test_symbolic_exponent_rejected(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expr("x^(y)")

    def test_division_by_zero(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expr("x/(1-1)")

    def test_restricted_variables(self):
        assert parse_expr("t^2+1", ["t"]).free_symbols == {sympy.Symbol("t", positive=True)}
        with pytest.raises(UnknownVariableError):
            parse_expr("x", ["t"])

    def test_tuple_split_respects_parentheses(self):
        assert split_components("x*(y+1)^2, y/(y+1)") == ["x*(y+1)^2", "y/(y+1)"]
        assert parse_tuple("x/(1-x), y/(1-y)") == [x / (1 - x), y / (1 - y)]

    def test_empty_component(self):
        with pytest.raises(ExpressionSyntaxError):
            split_components("x,,y")


class TestNormalize:
    """Tests for canonical rational functions."""

    def test_cancels_common_factor(self):
        f = RatFunc.from_polys(Poly(x**2 - y**2, x, y), Poly(x - y, x, y))
        assert f == x + y
        assert f.den.is_one

    def test_scales_denominator(self):
        f = RatFunc.from_polys(Poly(2 * x, x, y), Poly(4 * y, x, y))
        assert f.as_expr() == x / (2 * y)
        assert f.den.LC(order="grlex") == 1

    def test_zero_numerator(self):
        f = RatFunc.from_polys(Poly(0, x, y), Poly(x + 3 * y, x, y))
        assert f.is_zero
        assert f.den.is_one

    def test_zero_denominator(self):
        with pytest.raises(DomainError):
            RatFunc.from_polys(Poly(x, x), Poly(0, x))

    def test_arithmetic(self):
        f = RatFunc.from_expr(x / (y + x), (x, y))
        g = RatFunc.from_expr(y / (x + y), (x, y))
        assert f + g == 1
        assert f * g == x * y / (x + y) ** 2
        assert f**-1 == (x + y) / x
        assert (f / g) == x / y

    def test_derivative(self):
        f = RatFunc.from_expr(x / (y + 1), (x, y))
        assert f.diff(y) == -x / (y + 1) ** 2

    def test_compose(self):
        f = RatFunc.from_expr(x / (y + 1), (x, y))
        assert f.compose((x * y, x / (x + y)), (x, y)) == x * y * (x + y) / (2 * x + y)

    def test_compose_matches_substitution(self):
        f = RatFunc.from_expr((x**2 + y) / (x * y**3), (x, y))
        values = (1 / (x + 1), y / (x - 1))
        expected = RatFunc.from_expr(substitute(f.as_expr(), dict(zip((x, y), values))), (x, y))
        assert f.compose(values, (x, y)) == expected

    def test_compose_into_more_variables(self):
        f = RatFunc.from_expr(x / (x + y), (x, y))
        assert f.compose((x * z, y * z), (x, y, z)) == x / (x + y)
        assert f.subs({y: z}) == x / (x + z)

    def test_compose_zero_denominator(self):
        f = RatFunc.from_expr(1 / (x - y), (x, y))
        with pytest.raises(DomainError):
            f.compose((y, y), (x, y))

    def test_evaluate(self):
        f = RatFunc.from_expr(x**2 / (x + y), (x, y))
        assert f.evaluate({x: 1, y: 2}) == Rational(1, 3)

    def test_with_gens_keeps_canonical_form(self):
        f = RatFunc.from_expr(-x / (2 * y), (x, y)).with_gens((x, y, z))
        assert f.gens == (x, y, z)
        assert f.den.LC(order="grlex") == 1
        assert f == RatFunc.from_expr(-x / (2 * y), (x, y, z))

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(
        st.lists(st.integers(-5, 5), min_size=3, max_size=3),
        st.lists(st.integers(-5, 5), min_size=3, max_size=3),
    )
    def test_normalize_idempotent(self, a, b):
        num = a[0] * x**2 + a[1] * x * y + a[2] * y**2
        den = b[0] * x + b[1] * y + b[2]
        if den == 0:
            return
        f = RatFunc.from_expr(num / den, (x, y))
        assert normalize(normalize(f)) == normalize(f)
        assert normalize(f).num.as_expr() == f.num.as_expr()


class TestCalculus:
    """Tests for diff, substitute and homogeneity."""

    def test_diff(self):
        assert diff(x**2 * y, x) == 2 * x * y
        assert diff((y + 1) ** Rational(4, 3), x) == 0
        assert is_zero(diff(x / (y + 1), y) + x / (y + 1) ** 2)

    def test_substitute_scaling(self):
        assert sympy.cancel(substitute(x / y, {x: x * z, y: y * z})) == x / y

    def test_substitute_is_simultaneous(self):
        assert substitute(x * y**2, {x: y, y: x}) == y * x**2

    def test_substitute_partial(self):
        assert substitute(x + y, {x: x / (1 - x)}) == x / (1 - x) + y

    def test_substitute_identity(self):
        f = x**2 / (x + y) + (y + 1) ** Rational(1, 3)
        assert substitute(f, {x: x}) == f

    def test_substitute_division_by_zero(self):
        with pytest.raises(DomainError):
            substitute(1 / (x - y), {x: y})

    def test_substitute_zero_factor_after_expansion(self):
        vanishing = (x + 1) ** 2 - x**2 - 2 * x - y
        with pytest.raises(DomainError):
            substitute(1 / ((x + y) * vanishing), {y: 1})

    def test_homogeneity(self):
        assert homogeneity_degree(x**2 * y / (x + y)) == 2
        assert homogeneity_degree(x + 1) is None
        assert homogeneity_degree(z * (x**2 + x * y)) == 3

    def test_homogeneity_of_closed_form(self):
        expr = (x**3 + y**3) ** Rational(1, 3)
        assert homogeneity_degree(expr, (x, y)) == 1
        assert homogeneity_degree((x + 1) ** Rational(1, 2), (x, y)) is None

    def test_zero_is_homogeneous_of_every_degree(self):
        assert homogeneity_degree(sympy.Integer(0)) is None
        assert is_homogeneous_of(sympy.Integer(0), 5)

    def test_degree_is_additive(self):
        f, g = x**2 / (x + y), (x * y) ** Rational(1, 2)
        assert homogeneity_degree(f * g, (x, y)) == homogeneity_degree(
            f, (x, y)
        ) + homogeneity_degree(g, (x, y))


class TestEvalNumeric:
    """Tests for principal-branch evaluation."""

    def test_rational(self):
        assert eval_numeric(x / (y + 1), {"x": 1.0, "y": 1.0}) == 0.5

    def test_power_at_one(self):
        assert eval_numeric((y + 1) ** Rational(4, 3), {"y": 0.0}) == 1.0

    def test_branch_violation(self):
        with pytest.raises(BranchError) as exc:
            eval_numeric((y + 1) ** Rational(1, 2), {"y": -2.0})
        assert exc.value.min_base == -1.0

    def test_pole(self):
        with pytest.raises(SingularityError):
            eval_numeric(1 / (x - y), {"x": 1.0, "y": 1.0})

    def test_derivative_matches_central_differences(self):
        rng = random.Random(0)
        f = x**2 * (y + 1) ** Rational(4, 3) / (x + 2 * y)
        df = compile_numeric(diff(f, x), (x, y))
        fn = compile_numeric(f, (x, y))
        for _ in range(20):
            px, py = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
            h = 1e-5
            estimate = (fn(px + h, py) - fn(px - h, py)) / (2 * h)
            exact = df(px, py)
            assert math.isclose(float(estimate), float(exact), rel_tol=1e-6)


class TestPartialFractions:
    """Tests for partial_fractions and the residue test."""

    def test_simple_poles(self):
        f = RatFunc.from_expr((x - 1) / (x**2 + x), (x,))
        result = partial_fractions(f)
        residues = {t.factor.as_expr(): t.residue.residue for t in result.terms}
        assert residues == {x: -1, x + 1: 2}
        assert result.poly_part.is_zero

    def test_conjugate_pair_has_no_rational_residue(self):
        result = partial_fractions(RatFunc.from_expr(1 / (x**2 + 1), (x,)))
        (term,) = result.terms
        assert term.factor.as_expr() == x**2 + 1
        assert term.residue is not None
        assert not term.residue.common

    def test_conjugate_pair_with_common_residue(self):
        # 2x/(x^2 - 2): residue 1 at both roots of an irreducible quadratic
        result = partial_fractions(RatFunc.from_expr(2 * x / (x**2 - 2), (x,)))
        (term,) = result.terms
        assert term.residue.common
        assert term.residue.residue == 1

    def test_polynomial(self):
        result = partial_fractions(RatFunc.from_expr(x, (x,)))
        assert result.poly_part.as_expr() == x
        assert result.terms == ()

    def test_multiple_pole(self):
        f = RatFunc.from_expr((x**3 + 1) / (x**2 * (x - 1)), (x,))
        result = partial_fractions(f)
        by_factor = {t.factor.as_expr(): t for t in result.terms}
        assert by_factor[x].multiplicity == 2
        assert by_factor[x].residue is None
        assert by_factor[x - 1].residue.residue == 2

    def test_not_univariate(self):
        with pytest.raises(DomainError):
            partial_fractions(RatFunc.from_expr(1 / (x + y), (x, y)))

    def test_recombines(self):
        rng = random.Random(0)
        for _ in range(10):
            num = sum(rng.randint(-4, 4) * x**k for k in range(4))
            den = (x - rng.randint(-3, 3)) ** 2 * (x**2 + rng.randint(1, 3)) * (x + 5)
            f = RatFunc.from_expr(num / den, (x,))
            assert partial_fractions(f).recombine() == f


class TestPrinter:
    """Tests for format_expr."""

    def test_round_trip(self):
        for expr in (
            x * (y + 1) ** 2,
            (x**3 + y**4) ** Rational(1, 3) / (y + 1) ** Rational(4, 3),
            -x / (3 * y**2),
            x ** (-2) + Rational(5, 7),
        ):
            assert is_zero(parse_expr(format_expr(expr)) - expr)

    def test_caret_power(self):
        assert format_expr(x**2) == "x^2"
        assert format_expr((y + 1) ** Rational(4, 3)) == "(y + 1)^(4/3)"
