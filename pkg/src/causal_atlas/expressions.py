"""Arithmetic expression language for metric components.

Grammar::

    expr   : term (('+' | '-') term)*
    term   : unary (('*' | '/') unary)*
    unary  : ('+' | '-')* power
    power  : atom ('^' unary)?          # right associative
    atom   : NUMBER | 't' | 'x' | FUNC '(' expr ')' | '(' expr ')'

The only variables are ``t`` and ``x`` and the function set is fixed; there
are no user-defined names.  Parsing compiles straight to a Python callable
``(t, x) -> float`` via generated source, kept on the result for audit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

__all__ = ["ExpressionError", "CompiledExpression", "parse_expression", "FUNCTIONS"]

# Allowed single-argument functions, mapped to their Python spelling.
FUNCTIONS = {
    "sin": "math.sin",
    "cos": "math.cos",
    "tan": "math.tan",
    "sinh": "math.sinh",
    "cosh": "math.cosh",
    "tanh": "math.tanh",
    "exp": "math.exp",
    "log": "math.log",
    "atan": "math.atan",
    "sqrt": "math.sqrt",
    "abs": "abs",
}

VARIABLES = ("t", "x")


class ExpressionError(ValueError):
    """Parse or evaluation failure, carrying the offending position."""

    def __init__(self, message: str, source: str, position: int):
        self.source = source
        self.position = position
        super().__init__(f"{message} at position {position}: {source!r}")


_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r"|(?P<ws>\s+)"
    r"|(?P<bad>.)"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    for m in _TOKEN_RE.finditer(source):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ExpressionError(f"unexpected character {m.group()!r}", source, m.start())
        tokens.append((kind, m.group(), m.start()))
    tokens.append(("end", "", len(source)))
    return tokens


@dataclass(frozen=True)
class CompiledExpression:
    """A parsed expression together with its generated Python source."""

    source: str
    python_source: str
    variables: frozenset[str]
    fn: Callable[[float, float], float] = field(repr=False, compare=False)

    def __call__(self, t: float, x: float) -> float:
        try:
            return self.fn(t, x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ExpressionError(f"evaluation failed ({exc})", self.source, 0) from None


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0
        self.used: set[str] = set()

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ExpressionError(message, self.source, tok[2])

    def parse(self) -> str:
        src = self.expr()
        kind, text, _ = self.peek()
        if kind != "end":
            self.error(f"unexpected {text!r}")
        return src

    def expr(self) -> str:
        out = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            out = f"({out} {op} {self.term()})"
        return out

    def term(self) -> str:
        out = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            out = f"({out} {op} {self.unary()})"
        return out

    def unary(self) -> str:
        signs = []
        while self.peek()[1] in ("+", "-"):
            signs.append(self.advance()[1])
        out = self.power()
        for op in reversed(signs):
            if op == "-":
                out = f"(-{out})"
        return out

    def power(self) -> str:
        base = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            return f"({base} ** {self.unary()})"
        return base

    def atom(self) -> str:
        kind, text, pos = self.advance()
        if kind == "num":
            return text
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "name":
            if text in VARIABLES:
                self.used.add(text)
                return text
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return f"{FUNCTIONS[text]}({arg})"
            if self.peek()[1] == "(":
                raise ExpressionError(f"unknown function {text!r}", self.source, pos)
            raise ExpressionError(
                f"unknown name {text!r} (only variables t, x are allowed)", self.source, pos
            )
        raise ExpressionError(f"unexpected {text!r}" if text else "unexpected end of input",
                              self.source, pos)

    def expect(self, literal: str):
        kind, text, _ = self.peek()
        if text != literal:
            self.error(f"expected {literal!r}")
        self.advance()


def parse_expression(source: str) -> CompiledExpression:
    """Parse ``source`` and compile it to a callable of (t, x)."""
    parser = _Parser(source)
    body = parser.parse()
    python_source = f"lambda t, x: {body}"
    fn = eval(python_source, {"math": math, "abs": abs, "__builtins__": {}})
    return CompiledExpression(
        source=source,
        python_source=python_source,
        variables=frozenset(parser.used),
        fn=fn,
    )
