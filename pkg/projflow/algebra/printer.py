"""Render expressions in the input grammar so that reports re-parse."""

from __future__ import annotations

from collections.abc import Iterable

from sympy import Expr
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from projflow.algebra.expr import as_expr


class ExprPrinter(StrPrinter):
    """StrPrinter with '^' powers and parenthesized rational exponents."""

    def _print_Pow(self, expr: Expr, rational: bool = False) -> str:
        base, exp = expr.base, expr.exp
        base_str = self.parenthesize(base, PRECEDENCE["Pow"], strict=True)
        if exp.is_Integer and exp >= 0:
            return f"{base_str}^{exp}"
        if exp.is_Integer:
            return f"{base_str}^({exp})"
        return f"{base_str}^({exp.p}/{exp.q})"


_printer = ExprPrinter({"order": None})


def format_expr(value: object) -> str:
    return str(_printer.doprint(as_expr(value)))


def format_tuple(values: Iterable[object]) -> list[str]:
    return [format_expr(v) for v in values]
