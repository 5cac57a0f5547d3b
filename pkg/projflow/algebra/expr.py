"""
Closed-form expressions over exact rationals.

A ClosedForm is a sympy expression built only from rational constants,
coordinate symbols, sums, products and powers with rational exponents.
Coordinate symbols are declared positive so that principal real powers
simplify the way they do near the identity of a flow, e.g. (x^3)^(1/3) = x.

Handles:
- The coordinate symbol registry
- Structural validation of closed forms
- Differentiation, simultaneous substitution, homogeneity degree
- Exact zero testing
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from functools import lru_cache
from typing import Union

import sympy
from sympy import Expr, Rational, Symbol

from projflow.errors import DomainError

logger = logging.getLogger(__name__)

ClosedForm = Expr
Rat = Rational
Scalar = Union[int, Rational]

COORDINATE_NAMES: tuple[str, ...] = ("x", "y", "z", "w")


@lru_cache(maxsize=None)
def symbol(name: str) -> Symbol:
    """Return the registered positive symbol for a coordinate or time name."""
    return Symbol(name, positive=True)


def symbols(names: Iterable[str]) -> tuple[Symbol, ...]:
    return tuple(symbol(n) for n in names)


def default_variables(arity: int, names: Iterable[str] = ()) -> tuple[Symbol, ...]:
    """Coordinate tuple for a flow of the given arity: x,y[,z|w]."""
    used = set(names)
    if arity == 1:
        return symbols("x")
    if arity == 2:
        return symbols("xy")
    if arity == 3:
        return symbols("xyw") if "w" in used and "z" not in used else symbols("xyz")
    if arity == 4:
        return symbols("xyzw")
    raise DomainError(f"unsupported arity {arity}; expected 1 to 4 components")


def time_symbol(name: str = "t") -> Symbol:
    """Symbol used for scaling and time parameters; never a coordinate name."""
    return symbol(f"{name}_")


def sort_symbols(syms: Iterable[Symbol]) -> tuple[Symbol, ...]:
    def key(s: Symbol) -> tuple[int, str]:
        name = s.name
        return (COORDINATE_NAMES.index(name), name) if name in COORDINATE_NAMES else (9, name)

    return tuple(sorted(set(syms), key=key))


def as_expr(value: object) -> Expr:
    """Coerce ints, Rationals, strings of numbers and RatFuncs to an expression."""
    to_expr = getattr(value, "as_expr", None)
    if callable(to_expr) and not isinstance(value, Expr):
        result = to_expr()
        assert isinstance(result, Expr)
        return result
    return sympy.sympify(value, rational=True)  # type: ignore[no-any-return]


def check_closed_form(expr: Expr) -> Expr:
    """Raise DomainError unless expr only uses the closed-form node kinds."""
    for node in sympy.preorder_traversal(expr):
        if node.is_Symbol or node.is_Rational or node.is_Add or node.is_Mul:
            continue
        if node.is_Pow:
            if not node.exp.is_Rational:
                raise DomainError(f"non-rational exponent in {node}")
            continue
        raise DomainError(f"unsupported expression node {node}")
    return expr


def is_rational_expr(expr: Expr, variables: Sequence[Symbol] | None = None) -> bool:
    gens = tuple(variables) if variables is not None else tuple(expr.free_symbols)
    return bool(expr.is_rational_function(*gens)) if gens else bool(expr.is_Rational)


def tidy(expr: Expr) -> Expr:
    """Canonical-ish form: cancel rational parts, merge equal power bases."""
    expr = sympy.sympify(expr)
    if is_rational_expr(expr):
        return sympy.cancel(expr)
    return sympy.powsimp(sympy.together(expr))


def is_zero(expr: Expr) -> bool:
    """Exact zero test, decidable for rational expressions."""
    expr = sympy.sympify(expr)
    if expr == 0:
        return True
    if is_rational_expr(expr):
        return bool(sympy.cancel(sympy.together(expr)) == 0)
    if sympy.simplify(expr) == 0:
        return True
    return expr.equals(0) is True


def diff(f: Expr, var: Symbol) -> Expr:
    """Formal partial derivative."""
    return sympy.diff(as_expr(f), var)


def substitute(f: Expr, bindings: Mapping[Symbol, object]) -> Expr:
    """Simultaneous substitution; raises when a denominator vanishes identically."""
    expr = as_expr(f)
    replaced = expr.xreplace({k: as_expr(v) for k, v in bindings.items()})
    if replaced.has(sympy.zoo, sympy.nan):
        raise DomainError(f"division by zero after substituting into {expr}")
    if is_rational_expr(replaced):
        _, den = sympy.fraction(sympy.together(replaced))
        if any(_vanishes(factor) for factor in sympy.Mul.make_args(den)):
            raise DomainError(f"division by zero after substituting into {expr}")
    return replaced


def _vanishes(factor: Expr) -> bool:
    base = factor.base if factor.is_Pow else factor
    return bool(sympy.cancel(base) == 0)


def scale(f: Expr, variables: Sequence[Symbol], factor: Expr) -> Expr:
    """f(x·factor) with all coordinates scaled."""
    return as_expr(f).xreplace({v: v * factor for v in variables})


def homogeneity_degree(f: Expr, variables: Sequence[Symbol] | None = None) -> Rational | None:
    """
    Degree d with f(tx) = t^d f(x) as a formal identity, or None.

    The zero function is homogeneous of every degree and reports None; use
    is_homogeneous_of for membership tests.
    """
    expr = as_expr(f)
    gens = tuple(variables) if variables is not None else sort_symbols(expr.free_symbols)
    if expr == 0:
        return None
    if not gens:
        return Rational(0)
    if is_rational_expr(expr, gens):
        num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
        pn = sympy.Poly(num, *gens)
        pd = sympy.Poly(den, *gens)
        if pn.is_homogeneous and pd.is_homogeneous:
            return Rational(pn.total_degree() - pd.total_degree())
        return None
    # Euler: sum x_i f_{x_i} = d f
    euler = sympy.Add(*[v * sympy.diff(expr, v) for v in gens])
    ratio = sympy.simplify(euler / expr)
    if ratio.is_Rational:
        t = time_symbol("h")
        if is_zero(scale(expr, gens, t) - t**ratio * expr):
            return Rational(ratio)
    logger.debug(f"no homogeneity degree for {expr}")
    return None


def is_homogeneous_of(f: Expr, degree: Scalar, variables: Sequence[Symbol] | None = None) -> bool:
    expr = as_expr(f)
    if expr == 0:
        return True
    return homogeneity_degree(expr, variables) == Rational(degree)
