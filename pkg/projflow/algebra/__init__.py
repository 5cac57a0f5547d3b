"""Exact algebra kernel: closed forms, rational functions, parsing and evaluation."""

from projflow.algebra.evaluate import (
    DENOMINATOR_GUARD,
    NumericFunction,
    compile_numeric,
    eval_numeric,
)
from projflow.algebra.expr import (
    COORDINATE_NAMES,
    ClosedForm,
    default_variables,
    diff,
    homogeneity_degree,
    is_homogeneous_of,
    is_zero,
    substitute,
    symbol,
    symbols,
    tidy,
    time_symbol,
)
from projflow.algebra.parser import parse_expr, parse_tuple
from projflow.algebra.partial import FractionTerm, PartialFractions, ResidueData, partial_fractions
from projflow.algebra.printer import format_expr, format_tuple
from projflow.algebra.ratfunc import RatFunc, normalize

__all__ = [
    # Expressions
    "COORDINATE_NAMES",
    "ClosedForm",
    "default_variables",
    "diff",
    "homogeneity_degree",
    "is_homogeneous_of",
    "is_zero",
    "substitute",
    "symbol",
    "symbols",
    "tidy",
    "time_symbol",
    # Rational functions
    "RatFunc",
    "normalize",
    "FractionTerm",
    "PartialFractions",
    "ResidueData",
    "partial_fractions",
    # Text
    "parse_expr",
    "parse_tuple",
    "format_expr",
    "format_tuple",
    # Numerics
    "DENOMINATOR_GUARD",
    "NumericFunction",
    "compile_numeric",
    "eval_numeric",
]
