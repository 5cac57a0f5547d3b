"""
Partial fractions of univariate rational functions over QQ.

The denominator is factored into QQ-irreducibles; each local numerator is
obtained by inverting the cofactor modulo p^m and split into p-adic digits.
For every simple factor p the residues at the roots of p are tested for a
common rational value without leaving QQ: the candidate is the trace of
h·D'^(-1) mod p divided by deg p, accepted only when the reduced class is
that constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from sympy import QQ, Poly, Rational, Symbol

from projflow.algebra.ratfunc import RatFunc
from projflow.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResidueData:
    """Whether all roots of a simple factor share one rational residue."""

    common: bool
    residue: Rational | None = None


@dataclass(frozen=True)
class FractionTerm:
    """sum_{j=1..m} numerators[j-1] / factor^j for one monic irreducible factor."""

    factor: Poly
    multiplicity: int
    numerators: tuple[Poly, ...]
    residue: ResidueData | None = None

    @property
    def is_simple(self) -> bool:
        return self.multiplicity == 1


@dataclass(frozen=True)
class PartialFractions:
    variable: Symbol
    poly_part: Poly
    terms: tuple[FractionTerm, ...]

    def recombine(self) -> RatFunc:
        gens = (self.variable,)
        total = RatFunc.from_polys(self.poly_part, Poly(1, self.variable, domain=QQ))
        for term in self.terms:
            for power, numerator in enumerate(term.numerators, start=1):
                total = total + RatFunc.from_polys(numerator, term.factor**power)
        return total.with_gens(gens)

    @property
    def residues(self) -> dict[Poly, ResidueData]:
        return {t.factor: t.residue for t in self.terms if t.residue is not None}


def trace_mod(g: Poly, p: Poly) -> Rational:
    """Trace of multiplication by g in QQ[x]/(p)."""
    x = p.gens[0]
    total = Rational(0)
    for i in range(p.degree()):
        total += (g * Poly(x**i, x, domain=QQ)).rem(p).coeff_monomial(x**i)
    return total


def residue_data(h: Poly, den: Poly, p: Poly) -> ResidueData:
    """Common residue of h/den at the roots of the simple factor p."""
    g = (h * den.diff().invert(p)).rem(p)
    candidate = trace_mod(g, p) / p.degree()
    if (g - candidate).rem(p).is_zero:
        return ResidueData(True, Rational(candidate))
    return ResidueData(False, None)


def _padic_digits(value: Poly, p: Poly, count: int) -> list[Poly]:
    digits = []
    for _ in range(count):
        value, digit = value.div(p)
        digits.append(digit)
    return digits


def partial_fractions(f: RatFunc) -> PartialFractions:
    """Exact decomposition of a univariate rational function."""
    free = [g for g in f.gens if f.num.degree(g) > 0 or f.den.degree(g) > 0]
    if len(free) > 1:
        raise DomainError(f"{f} is not univariate")
    var = free[0] if free else f.gens[0]
    f = f.with_gens((var,))
    num, den = f.num, f.den

    poly_part, h = num.div(den)
    if h.is_zero:
        return PartialFractions(var, poly_part, ())

    _, factors = den.factor_list()
    terms: list[FractionTerm] = []
    for factor, multiplicity in factors:
        p = factor.monic()
        block = p**multiplicity
        cofactor = den.exquo(block)
        local = (h * cofactor.invert(block)).rem(block)
        # local/p^m = sum_k digit_k p^(k-m): digit_k is the numerator of p^(m-k)
        digits = _padic_digits(local, p, multiplicity)
        numerators = tuple(reversed(digits))
        residue = residue_data(h, den, p) if multiplicity == 1 else None
        logger.debug(f"factor {p.as_expr()}^{multiplicity}: residue {residue}")
        terms.append(FractionTerm(p, multiplicity, numerators, residue))

    return PartialFractions(var, poly_part, tuple(terms))
