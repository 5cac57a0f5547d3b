"""
Exact multivariate rational functions over QQ.

A RatFunc stores numerator and denominator as sympy Polys over QQ in a
common tuple of generators. The canonical form removes the multivariate
GCD and scales the denominator so that its leading coefficient in graded
lexicographic order is +1; two canonical RatFuncs are equal exactly when
their numerators and denominators are equal.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Union

import sympy
from sympy import QQ, Expr, Poly, Rational, Symbol

from projflow.algebra.expr import (
    as_expr,
    is_rational_expr,
    sort_symbols,
    symbol,
)
from projflow.errors import DomainError, NotRationalError

MPoly = Poly

RatLike = Union["RatFunc", Expr, int, Rational]


def _poly(expr: Expr, gens: Sequence[Symbol]) -> Poly:
    return Poly(expr, *gens, domain=QQ)


def _monic(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    lc = den.LC(order="grlex")
    if lc != 1:
        num = num.exquo_ground(lc)
        den = den.exquo_ground(lc)
    return num, den


def _powers(base: Poly, top: int) -> list[Poly]:
    table = [base.one]
    for _ in range(top):
        table.append(table[-1] * base)
    return table


def _cleared(p: Poly, values: Sequence[RatFunc]) -> tuple[Poly, tuple[int, ...]]:
    """
    p(values) as Q / prod(den_i^e_i), returning Q and e.

    e is the degree of p in each generator, so Q is a polynomial.
    """
    degrees = tuple(max(d, 0) for d in p.degree_list())
    nums = [_powers(v.num, d) for v, d in zip(values, degrees)]
    dens = [_powers(v.den, d) for v, d in zip(values, degrees)]
    unit = values[0].num.one
    total = values[0].num.zero
    for monom, coeff in p.terms():
        term = unit.mul_ground(coeff)
        for i, a in enumerate(monom):
            for factor in (nums[i][a], dens[i][degrees[i] - a]):
                if not factor.is_one:
                    term = term * factor
        total = total + term
    return total, degrees


@dataclass(frozen=True, eq=False)
class RatFunc:
    """Canonical quotient num/den of polynomials over QQ."""

    num: Poly
    den: Poly

    @classmethod
    def from_polys(cls, num: Poly, den: Poly) -> RatFunc:
        """Build the canonical form of num/den (the normalize operation)."""
        num, den = num.unify(den)
        if den.is_zero:
            raise DomainError("zero denominator")
        num = num.set_domain(QQ)
        den = den.set_domain(QQ)
        if num.is_zero:
            return cls(num, Poly(1, *den.gens, domain=QQ))
        g = num.gcd(den)
        if not g.is_one:
            num = num.exquo(g)
            den = den.exquo(g)
        return cls(*_monic(num, den))

    @classmethod
    def from_expr(cls, expr: object, gens: Sequence[Symbol] | None = None) -> RatFunc:
        if isinstance(expr, RatFunc):
            return expr if gens is None else expr.with_gens(gens)
        value = as_expr(expr)
        if value.has(sympy.zoo, sympy.nan):
            raise DomainError(f"undefined value {value}")
        found = sort_symbols(value.free_symbols)
        if gens is None:
            gens = found or (symbol("x"),)
        elif not set(found) <= set(gens):
            extra = ", ".join(str(s) for s in sort_symbols(set(found) - set(gens)))
            raise NotRationalError(f"{value} depends on {extra} outside {tuple(gens)}")
        if not is_rational_expr(value, gens):
            raise NotRationalError(f"{value} is not a rational function")
        num, den = sympy.fraction(sympy.cancel(sympy.together(value)))
        return cls.from_polys(_poly(num, gens), _poly(den, gens))

    @classmethod
    def constant(cls, value: Rational | int, gens: Sequence[Symbol]) -> RatFunc:
        return cls(_poly(sympy.Integer(1) * value, gens), _poly(sympy.Integer(1), gens))

    # -- views --------------------------------------------------------------

    @property
    def gens(self) -> tuple[Symbol, ...]:
        return tuple(self.num.gens)

    @property
    def is_zero(self) -> bool:
        return bool(self.num.is_zero)

    @property
    def is_polynomial(self) -> bool:
        return bool(self.den.is_ground)

    @property
    def is_constant(self) -> bool:
        return bool(self.num.is_ground and self.den.is_ground)

    def as_expr(self) -> Expr:
        return self.num.as_expr() / self.den.as_expr()

    def with_gens(self, gens: Sequence[Symbol]) -> RatFunc:
        gens = tuple(gens)
        if gens == self.gens:
            return self
        if set(self.gens) <= set(gens):
            # the gcd does not change with extra generators
            num, den = _poly(self.num.as_expr(), gens), _poly(self.den.as_expr(), gens)
            return RatFunc(*_monic(num, den))
        return RatFunc.from_expr(self.as_expr(), gens)

    def __repr__(self) -> str:
        return f"RatFunc({self.as_expr()})"

    def __str__(self) -> str:
        return str(self.as_expr())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Rational, Expr)):
            try:
                other = RatFunc.from_expr(other, self.gens)
            except DomainError:
                return False
        if not isinstance(other, RatFunc):
            return NotImplemented
        return bool(
            self.num.as_expr() == other.num.as_expr() and self.den.as_expr() == other.den.as_expr()
        )

    def __hash__(self) -> int:
        return hash((self.num.as_expr(), self.den.as_expr()))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other: RatLike) -> tuple[RatFunc, RatFunc]:
        if not isinstance(other, RatFunc):
            other_expr = as_expr(other)
            gens = sort_symbols(set(self.gens) | other_expr.free_symbols)
            return self.with_gens(gens), RatFunc.from_expr(other_expr, gens)
        if other.gens == self.gens:
            return self, other
        gens = sort_symbols(set(self.gens) | set(other.gens))
        return self.with_gens(gens), other.with_gens(gens)

    def __add__(self, other: RatLike) -> RatFunc:
        a, b = self._coerce(other)
        return RatFunc.from_polys(a.num * b.den + b.num * a.den, a.den * b.den)

    __radd__ = __add__

    def __neg__(self) -> RatFunc:
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: RatLike) -> RatFunc:
        a, b = self._coerce(other)
        return RatFunc.from_polys(a.num * b.den - b.num * a.den, a.den * b.den)

    def __rsub__(self, other: RatLike) -> RatFunc:
        return (-self) + other

    def __mul__(self, other: RatLike) -> RatFunc:
        a, b = self._coerce(other)
        return RatFunc.from_polys(a.num * b.num, a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other: RatLike) -> RatFunc:
        a, b = self._coerce(other)
        if b.is_zero:
            raise DomainError("division by the zero function")
        return RatFunc.from_polys(a.num * b.den, a.den * b.num)

    def __rtruediv__(self, other: RatLike) -> RatFunc:
        a, b = self._coerce(other)
        return b / a

    def __pow__(self, exponent: int) -> RatFunc:
        if not isinstance(exponent, int):
            raise NotRationalError("RatFunc powers must be integers")
        if exponent >= 0:
            return RatFunc(self.num**exponent, self.den**exponent)
        if self.is_zero:
            raise DomainError("negative power of the zero function")
        return RatFunc.from_polys(self.den ** (-exponent), self.num ** (-exponent))

    # -- calculus and composition ------------------------------------------

    def diff(self, var: Symbol) -> RatFunc:
        if var not in self.gens:
            return RatFunc.constant(0, self.gens)
        num = self.num.diff(var) * self.den - self.num * self.den.diff(var)
        return RatFunc.from_polys(num, self.den**2)

    def subs(
        self, bindings: Mapping[Symbol, RatLike], gens: Sequence[Symbol] | None = None
    ) -> RatFunc:
        """Simultaneous substitution; the result is canonical in gens."""
        images: list[RatLike] = []
        found: set[Symbol] = set()
        for g in self.gens:
            if g in bindings:
                value = bindings[g]
                images.append(value)
                if isinstance(value, RatFunc):
                    found |= set(value.gens)
                else:
                    found |= as_expr(value).free_symbols
            elif self.num.degree(g) > 0 or self.den.degree(g) > 0:
                images.append(g)
                found.add(g)
            else:
                images.append(0)
        if gens is None:
            gens = sort_symbols(found) or (symbol("x"),)
        return self.compose(images, gens)

    def compose(self, values: Sequence[RatLike], gens: Sequence[Symbol]) -> RatFunc:
        """self with values[i] in place of gens[i]; canonical in the given gens."""
        num, den = composition_parts(self, values, gens)
        return RatFunc.from_polys(num, den)

    def evaluate(self, point: Mapping[Symbol, Rational | int]) -> Rational:
        """Exact value at a rational point."""
        value = self.subs(point).as_expr()
        if not value.is_Rational:
            raise DomainError(f"point does not bind every variable of {self}")
        return Rational(value)

    def total_degree(self) -> int:
        return int(self.num.total_degree() - self.den.total_degree())


def normalize(f: RatFunc) -> RatFunc:
    """Canonical form; idempotent."""
    return RatFunc.from_polys(f.num, f.den)


def ratfuncs(exprs: Iterable[object], gens: Sequence[Symbol]) -> tuple[RatFunc, ...]:
    return tuple(RatFunc.from_expr(e, gens) for e in exprs)


def composition_parts(
    f: RatFunc, values: Sequence[RatLike], gens: Sequence[Symbol]
) -> tuple[Poly, Poly]:
    """
    Numerator and denominator of f(values) in gens, without the final gcd.

    Powers of the value denominators are cancelled by degree bookkeeping;
    raises DomainError when the composed denominator vanishes identically.
    """
    gens = tuple(gens)
    if len(values) != len(f.gens):
        raise DomainError(f"{len(values)} values for a function of {len(f.gens)} variables")
    bound = [RatFunc.from_expr(v, gens) for v in values]
    if f.is_zero:
        return _poly(sympy.Integer(0), gens), _poly(sympy.Integer(1), gens)
    num, num_degrees = _cleared(f.num, bound)
    den, den_degrees = _cleared(f.den, bound)
    if den.is_zero:
        raise DomainError(f"division by zero after substituting into {f}")
    for value, a, b in zip(bound, num_degrees, den_degrees):
        if b > a:
            num = num * value.den ** (b - a)
        elif a > b:
            den = den * value.den ** (a - b)
    return num, den
