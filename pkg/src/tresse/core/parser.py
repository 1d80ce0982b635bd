"""Precedence-climbing parser for the expression grammar.

Grammar: variables ``x y p u``, integer and decimal literals (``5/2`` is an
exact rational through division), ``+ - * / ^`` (``**`` is accepted as ``^``)
with unary minus binding looser than ``^``, the functions ``exp ln log sqrt``
and parentheses. With ``jets=True`` the jet coordinates ``u^k``, ``u_{lm}`` and
``u^k_{lm}`` are read as single variables.
"""

from dataclasses import dataclass
from typing import Any

import sympy

from tresse.core.symbols import P, U, X, Y, jet_symbol
from tresse.exceptions import ParseError

# Groups of increasing binding power
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("*", "left"), ("/", "left")],
    [("^", "right")],
]
OPERATOR_PREC = {name: idx for idx, group in enumerate(OPERATORS) for name, _ in group}
OPERATOR_ASSOC = {name: assoc for group in OPERATORS for name, assoc in group}
UNARY_MINUS_PREC = OPERATOR_PREC["^"]

FUNCTIONS: dict[str, Any] = {
    "exp": sympy.exp,
    "ln": sympy.log,
    "log": sympy.log,
    "sqrt": sympy.sqrt,
}

VARIABLES = {"x": X, "y": Y, "p": P, "u": U}


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, jet, op, lparen, rparen, comma
    value: Any
    pos: int


def tokenize(source: str, jets: bool = False) -> list[Token]:
    """Turn an input string into tokens.

    Raises:
        ParseError: On a character outside the grammar.
    """
    tokens: list[Token] = []
    idx = 0
    n = len(source)
    while idx < n:
        c = source[idx]
        if c.isspace():
            idx += 1
            continue
        if c.isdigit() or (c == "." and idx + 1 < n and source[idx + 1].isdigit()):
            start = idx
            while idx < n and (source[idx].isdigit() or source[idx] == "."):
                idx += 1
            text = source[start:idx]
            if text.count(".") > 1:
                raise ParseError(f"Malformed number '{text}'", start, source)
            tokens.append(Token("num", sympy.Rational(text), start))
            continue
        if c == "*" and idx + 1 < n and source[idx + 1] == "*":
            tokens.append(Token("op", "^", idx))
            idx += 2
            continue
        if c in "+-*/^":
            tokens.append(Token("op", c, idx))
            idx += 1
            continue
        if c == "(":
            tokens.append(Token("lparen", c, idx))
            idx += 1
            continue
        if c == ")":
            tokens.append(Token("rparen", c, idx))
            idx += 1
            continue
        if c == ",":
            tokens.append(Token("comma", c, idx))
            idx += 1
            continue
        if c.isalpha():
            start = idx
            while idx < n and source[idx].isalpha():
                idx += 1
            word = source[start:idx]
            if jets and word == "u":
                idx, token = _read_jet(source, start, idx)
                tokens.append(token)
                continue
            tokens.append(Token("name", word, start))
            continue
        raise ParseError(f"Unexpected character '{c}'", idx, source)
    return tokens


def _read_jet(source: str, start: int, idx: int) -> tuple[int, Token]:
    """Read the optional ``^k`` and ``_{lm}`` suffixes of a jet coordinate."""
    k = 0
    l = m = 0
    n = len(source)
    if idx < n and source[idx] == "^":
        j = idx + 1
        braced = j < n and source[j] == "{"
        if braced:
            j += 1
        digits_start = j
        while j < n and source[j].isdigit():
            j += 1
        if j > digits_start and (not braced or (j < n and source[j] == "}")):
            k = int(source[digits_start:j])
            idx = j + 1 if braced else j
    if source.startswith("_{", idx):
        j = idx + 2
        if j + 2 < n + 1 and source[j : j + 2].isdigit() and source[j + 2 : j + 3] == "}":
            l, m = int(source[j]), int(source[j + 1])
            idx = j + 3
        else:
            raise ParseError("Jet subscript must be two digits in braces, e.g. u_{10}", idx, source)
    return idx, Token("jet", (l, m, k), start)


class _Parser:
    def __init__(self, tokens: list[Token], source: str) -> None:
        self.tokens = tokens
        self.idx = 0
        self.source = source

    def peek(self) -> Token | None:
        return self.tokens[self.idx] if self.idx < len(self.tokens) else None

    def advance(self) -> Token:
        token = self.peek()
        if token is None:
            raise ParseError("Unexpected end of input", len(self.source), self.source)
        self.idx += 1
        return token

    def expect_rparen(self, opened: Token) -> None:
        token = self.peek()
        if token is None or token.kind != "rparen":
            pos = token.pos if token else len(self.source)
            raise ParseError(f"Expected ')' to close '(' at {opened.pos}", pos, self.source)
        self.idx += 1

    def atom(self) -> sympy.Expr:
        token = self.advance()
        if token.kind == "op" and token.value == "-":
            return -self.expr(UNARY_MINUS_PREC)
        if token.kind == "op" and token.value == "+":
            return self.expr(UNARY_MINUS_PREC)
        if token.kind == "lparen":
            inner = self.expr(0)
            self.expect_rparen(token)
            return inner
        if token.kind == "num":
            return token.value
        if token.kind == "jet":
            return jet_symbol(*token.value)
        if token.kind == "name":
            return self.name(token)
        raise ParseError(f"Unexpected token '{token.value}'", token.pos, self.source)

    def name(self, token: Token) -> sympy.Expr:
        nxt = self.peek()
        if nxt is not None and nxt.kind == "lparen":
            func = FUNCTIONS.get(token.value)
            if func is None:
                raise ParseError(f"Unknown function '{token.value}'", token.pos, self.source)
            opened = self.advance()
            arg = self.expr(0)
            self.expect_rparen(opened)
            return func(arg)
        if token.value in VARIABLES:
            return VARIABLES[token.value]
        if token.value in FUNCTIONS:
            raise ParseError(f"Function '{token.value}' needs an argument", token.pos, self.source)
        raise ParseError(f"Unknown variable '{token.value}'", token.pos, self.source)

    def expr(self, min_prec: int) -> sympy.Expr:
        lhs = self.atom()
        while (token := self.peek()) is not None and token.kind == "op":
            op_prec = OPERATOR_PREC[token.value]
            if op_prec < min_prec:
                return lhs
            self.idx += 1
            next_prec = op_prec + 1 if OPERATOR_ASSOC[token.value] == "left" else op_prec
            rhs = self.expr(next_prec)
            lhs = _apply(token.value, lhs, rhs)
        return lhs


def _apply(op: str, lhs: sympy.Expr, rhs: sympy.Expr) -> sympy.Expr:
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "/":
        return lhs / rhs
    return lhs**rhs


def parse(source: str, jets: bool = False) -> sympy.Expr:
    """Parse an expression into a sympy tree.

    Args:
        source: Expression text.
        jets: Read ``u^k_{lm}`` style jet coordinates.

    Returns:
        The expression.

    Raises:
        ParseError: With the offending position.
    """
    tokens = tokenize(source, jets=jets)
    if not tokens:
        raise ParseError("Empty expression", 0, source)
    parser = _Parser(tokens, source)
    result = parser.expr(0)
    leftover = parser.peek()
    if leftover is not None:
        raise ParseError(f"Unexpected '{leftover.value}'", leftover.pos, source)
    return result


def parse_pair(source: str) -> tuple[sympy.Expr, sympy.Expr]:
    """Parse a comma-separated pair, as used for point maps ``"X, Y"``."""
    tokens = tokenize(source)
    depth = 0
    split = None
    for i, token in enumerate(tokens):
        if token.kind == "lparen":
            depth += 1
        elif token.kind == "rparen":
            depth -= 1
        elif token.kind == "comma" and depth == 0:
            if split is not None:
                raise ParseError("Expected exactly two components", token.pos, source)
            split = i
    if split is None:
        raise ParseError("Expected two comma-separated components", len(source), source)
    comma = tokens[split].pos
    return parse(source[:comma]), parse(source[comma + 1 :])
