"""
Precedence-climbing parser for flow expressions.

Grammar:
    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | factor
    factor   := base ('^' exponent)?
    base     := number | variable | '(' expr ')'
    exponent := ['-'] integer | '(' expr ')'    (the parenthesized form must be a rational constant)

Numbers are decimal integers or decimal fractions (read exactly); a/b
rationals are ordinary division. '**' is accepted as a synonym for '^'.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass

import sympy
from sympy import Expr, Rational

from projflow.algebra.expr import COORDINATE_NAMES, symbol
from projflow.errors import ExpressionSyntaxError, UnknownVariableError

TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)

# Binding power of binary operators.
BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, end
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    idx = 0
    while idx < len(text):
        if text[idx].isspace():
            idx += 1
            continue
        match = TOKEN_RE.match(text, idx)
        if match is None or match.end() == idx:
            raise ExpressionSyntaxError(f"unexpected character '{text[idx]}'", idx)
        kind = match.lastgroup or "op"
        value = match.group(kind)
        start = match.start(kind)
        tokens.append(Token(kind, "^" if value == "**" else value, start))
        idx = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.variables = {name: symbol(name) for name in variables}

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind != "op":
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"expected '{text}', found '{found}'", token.position)
        return self.advance()

    def parse(self) -> Expr:
        result = self.parse_binary(1)
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{self.current.text}'", self.current.position)
        return result

    def parse_binary(self, min_prec: int) -> Expr:
        lhs = self.parse_unary()
        while True:
            token = self.current
            prec = BINARY_PREC.get(token.text) if token.kind == "op" else None
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            rhs = self.parse_binary(prec + 1)
            if token.text == "+":
                lhs = lhs + rhs
            elif token.text == "-":
                lhs = lhs - rhs
            elif token.text == "*":
                lhs = lhs * rhs
            else:
                if rhs == 0:
                    raise ExpressionSyntaxError("division by zero", token.position)
                lhs = lhs / rhs

    def parse_unary(self) -> Expr:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return -self.parse_unary()
        if self.current.kind == "op" and self.current.text == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_factor()

    def parse_factor(self) -> Expr:
        base = self.parse_base()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            exponent = self.parse_exponent()
            if base == 0 and exponent <= 0:
                raise ExpressionSyntaxError("zero to a non-positive power", self.current.position)
            return base**exponent  # type: ignore[no-any-return]
        return base

    def parse_exponent(self) -> Rational:
        token = self.current
        if token.kind == "op" and token.text == "(":
            self.advance()
            value = self.parse_binary(1)
            self.expect(")")
            if not value.is_Rational:
                raise ExpressionSyntaxError("exponent must be a rational constant", token.position)
            return Rational(value)
        sign = 1
        if token.kind == "op" and token.text == "-":
            self.advance()
            sign = -1
        number = self.current
        if number.kind != "number" or "." in number.text:
            raise ExpressionSyntaxError("exponent must be an integer", number.position)
        self.advance()
        return Rational(sign * int(number.text))

    def parse_base(self) -> Expr:
        token = self.advance()
        if token.kind == "number":
            return Rational(token.text)
        if token.kind == "name":
            if token.text not in self.variables:
                raise UnknownVariableError(token.text, token.position)
            return self.variables[token.text]
        if token.kind == "op" and token.text == "(":
            inner = self.parse_binary(1)
            self.expect(")")
            return inner
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected '{found}'", token.position)


def parse_expr(text: str, variables: Sequence[str] = COORDINATE_NAMES) -> Expr:
    """Parse text into a closed-form expression over the allowed variables."""
    return _Parser(text, variables).parse()


def split_components(text: str) -> list[str]:
    """Split a comma-separated tuple, respecting parentheses."""
    parts: list[str] = []
    depth = 0
    start = 0
    for idx, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == "," and depth == 0:
            parts.append(text[start:idx])
            start = idx + 1
    parts.append(text[start:])
    if any(not p.strip() for p in parts):
        raise ExpressionSyntaxError("empty component", len(text))
    return [p.strip() for p in parts]


def parse_tuple(text: str | Sequence[str], variables: Sequence[str] | None = None) -> list[Expr]:
    """Parse a comma-separated tuple (or a list of strings) of expressions."""
    parts = split_components(text) if isinstance(text, str) else list(text)
    names = variables if variables is not None else COORDINATE_NAMES
    return [sympy.sympify(parse_expr(p, names)) for p in parts]
