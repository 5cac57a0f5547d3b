"""
Truncated Puiseux series in one parameter with symbolic coefficients.

A Series stores the known coefficients below its precision: every
coefficient of t^k with k < precision is known (absent keys are zero),
nothing is known at or above it. Exponents are rational; exact series
carry infinite precision.

Handles:
- Expansion of closed forms (sums, products, rational powers) about t = 0
- Precision tracking through cancellation, with automatic retries
- Series of z^(-1)·f(x z) used for boundary checks and vector fields
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import sympy
from sympy import Expr, Integer, Poly, Rational, Symbol

from projflow.algebra.expr import as_expr, is_rational_expr, is_zero, tidy
from projflow.errors import DomainError

logger = logging.getLogger(__name__)

# exponents and precisions: ints, Rationals, or sympy.oo
Exponent = Any
INF = sympy.oo
INITIAL_SLACK = 4
MAX_SLACK = 64


class PrecisionLost(Exception):
    """Cancellation consumed every known coefficient; expand again with a higher cap."""


def _low(terms: Mapping[Exponent, Expr], precision: Exponent) -> Exponent:
    return min(terms) if terms else precision


@dataclass(frozen=True)
class Series:
    terms: Mapping[Exponent, Expr] = field(default_factory=dict)
    precision: Exponent = INF

    @classmethod
    def exact(cls, value: object) -> Series:
        expr = as_expr(value)
        return cls({} if expr == 0 else {0: expr}, INF)

    @classmethod
    def monomial(cls, exponent: int, coefficient: object = 1) -> Series:
        return cls({exponent: as_expr(coefficient)}, INF)

    @classmethod
    def from_poly(cls, poly: Poly) -> Series:
        terms = {int(m[0]): c for m, c in zip(poly.monoms(), poly.coeffs())}
        return cls._clean(terms, INF)

    @classmethod
    def _clean(cls, terms: Mapping[Exponent, Expr], precision: Exponent) -> Series:
        kept = {}
        for k, c in terms.items():
            if k >= precision:
                continue
            value = tidy(c)
            if value != 0:
                kept[k] = value
        return cls(kept, precision)

    @property
    def is_exact_zero(self) -> bool:
        return not self.terms and self.precision == INF

    def coefficient(self, k: int) -> Expr:
        if k >= self.precision:
            raise PrecisionLost(f"coefficient {k} beyond precision {self.precision}")
        return self.terms.get(k, Integer(0))

    def coefficients(self, count: int, start: int = 0) -> list[Expr]:
        return [self.coefficient(k) for k in range(start, start + count)]

    def truncate(self, cap: Exponent) -> Series:
        if cap >= self.precision:
            return self
        return Series({k: c for k, c in self.terms.items() if k < cap}, cap)

    def shift(self, offset: int) -> Series:
        """Multiply by t^offset."""
        return Series({k + offset: c for k, c in self.terms.items()}, self.precision + offset)

    def leading(self) -> tuple[Exponent, Expr]:
        """Exponent and coefficient of the first provably nonzero term."""
        for k in sorted(self.terms):
            c = self.terms[k]
            if not is_zero(c):
                return k, c
        if self.precision == INF:
            raise DomainError("the zero series has no leading term")
        raise PrecisionLost("no nonzero coefficient below the precision")

    def polar_part(self) -> dict[Exponent, Expr]:
        """Nonzero coefficients of negative powers."""
        return {k: c for k, c in self.terms.items() if k < 0 and not is_zero(c)}

    def ramified_part(self) -> dict[Exponent, Expr]:
        """Nonzero coefficients of non-integer powers."""
        return {
            k: c for k, c in self.terms.items() if not Rational(k).is_Integer and not is_zero(c)
        }

    def __add__(self, other: Series) -> Series:
        precision = min(self.precision, other.precision)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return Series._clean(terms, precision)

    def __neg__(self) -> Series:
        return Series({k: -c for k, c in self.terms.items()}, self.precision)

    def __sub__(self, other: Series) -> Series:
        return self + (-other)

    def __mul__(self, other: Series) -> Series:
        if self.is_exact_zero or other.is_exact_zero:
            return Series()
        precision = min(
            self.precision + _low(other.terms, other.precision),
            other.precision + _low(self.terms, self.precision),
        )
        terms: dict[Exponent, Expr] = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                if i + j < precision:
                    terms[i + j] = terms.get(i + j, Integer(0)) + a * b
        return Series._clean(terms, precision)

    def scale(self, factor: Expr) -> Series:
        if factor == 0:
            return Series()
        return Series._clean({k: factor * c for k, c in self.terms.items()}, self.precision)

    def power(self, exponent: Rational, cap: Exponent = INF) -> Series:
        """
        Rational power by the binomial expansion about the leading term.

        Factors c·t^v out, so the result starts at t^(v·e) and proceeds on
        the grid of exponents of the relative series. Fractional exponents
        are allowed here; products of ramified factors may be unramified.
        """
        exponent = Rational(exponent)
        if exponent == 0:
            return Series.exact(1)
        if self.is_exact_zero:
            if exponent < 0:
                raise DomainError("negative power of the zero series")
            return Series()
        if exponent.is_Integer and exponent > 0:
            result, base, remaining = Series.exact(1), self, int(exponent)
            while remaining:
                if remaining & 1:
                    result = (result * base).truncate(cap)
                remaining >>= 1
                if remaining:
                    base = (base * base).truncate(cap)
            return result
        v, c = self.leading()
        if not exponent.is_Integer and c.is_negative:
            raise DomainError(f"fractional power of a negative leading coefficient {c}")
        shifted = Rational(v) * exponent
        limit = min(self.precision - v, cap - shifted)
        if limit == INF:
            raise DomainError("an infinite expansion needs a finite cap")
        if limit <= 0:
            return Series({}, shifted + max(limit, 0))

        # relative exponents live on the grid (1/step)·Z
        step = sympy.ilcm(1, *[Rational(k - v).q for k in self.terms])
        count = int(sympy.ceiling(Rational(limit) * step))
        ratios = [Integer(1)] + [
            tidy(self.terms.get(v + Rational(j, step), Integer(0)) / c) for j in range(1, count)
        ]
        # Miller's recurrence for g = f^e with f_0 = 1
        g = [Integer(1)]
        for k in range(1, count):
            total = Integer(0)
            for j in range(1, k + 1):
                if ratios[j] != 0:
                    total += ((exponent + 1) * j - k) * ratios[j] * g[k - j]
            g.append(tidy(total / k))

        lead = c**exponent
        terms = {shifted + Rational(k, step): lead * gk for k, gk in enumerate(g)}
        return Series._clean(terms, shifted + limit)

    def inverse(self, cap: Exponent = INF) -> Series:
        return self.power(Integer(-1), cap)

    def as_expr(self, parameter: Symbol) -> Expr:
        return sympy.Add(*[c * parameter**k for k, c in sorted(self.terms.items())])


class SeriesExpander:
    """Expands closed forms in a parameter t, truncating every node at a cap."""

    def __init__(self, parameter: Symbol, cap: int):
        self.parameter = parameter
        self.cap = cap
        self._memo: dict[Expr, Series] = {}

    def expand(self, expr: Expr) -> Series:
        expr = as_expr(expr)
        if expr in self._memo:
            return self._memo[expr]
        result = self._expand(expr).truncate(self.cap)
        self._memo[expr] = result
        return result

    def _expand(self, expr: Expr) -> Series:
        t = self.parameter
        if t not in expr.free_symbols:
            return Series.exact(expr)
        if expr == t:
            return Series.monomial(1)
        if is_rational_expr(expr):
            return self._expand_rational(expr)
        if expr.is_Add:
            total = Series()
            for arg in expr.args:
                total = total + self.expand(arg)
            return total
        if expr.is_Mul:
            constant = sympy.Mul(*[a for a in expr.args if t not in a.free_symbols])
            product = Series.exact(constant)
            for arg in expr.args:
                if t in arg.free_symbols:
                    product = (product * self.expand(arg)).truncate(self.cap)
            return product
        if expr.is_Pow:
            if t in expr.exp.free_symbols or not expr.exp.is_Rational:
                raise DomainError(f"exponent of {expr} must be a rational constant")
            return self.expand(expr.base).power(expr.exp, self.cap)
        raise DomainError(f"cannot expand {expr} as a series")

    def _expand_rational(self, expr: Expr) -> Series:
        num, den = sympy.fraction(sympy.together(expr))
        t = self.parameter
        num_series = Series.from_poly(Poly(num, t))
        den_series = Series.from_poly(Poly(den, t))
        return num_series * den_series.inverse(self.cap - _low(num_series.terms, INF))


def expand_series(expr: object, parameter: Symbol, order: int, start: int = 0) -> Series:
    """
    Series of expr in the parameter, known at least for exponents below order.

    Cancellation can eat precision; the cap is raised until the requested
    coefficients are all determined.
    """
    value = as_expr(expr)
    slack = INITIAL_SLACK
    while slack <= MAX_SLACK:
        try:
            series = SeriesExpander(parameter, order + slack).expand(value)
            if series.precision >= order:
                return series
        except PrecisionLost:
            pass
        logger.debug(f"series of {value} short of order {order} with slack {slack}; retrying")
        slack *= 2
    raise DomainError(f"cannot determine the series of {value} to order {order}")


def shifted_series(
    components: Sequence[Expr], variables: Sequence[Symbol], parameter: Symbol, order: int
) -> list[Series]:
    """Series of t^(-1)·f(x t) for each component, known below t^order."""
    scaled = {v: v * parameter for v in variables}
    return [
        expand_series(as_expr(c).xreplace(scaled), parameter, order + 1).shift(-1)
        for c in components
    ]
