"""Arithmetic expression trees: parsing, evaluation, differentiation.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' UNSIGNED_INT)?
    atom   := NUMBER | IDENT | '(' expr ')'

Evaluation is elementwise, so environments may bind numpy arrays.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np


class ExpressionError(ValueError):
    """Raised when an expression cannot be evaluated."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"

    def __post_init__(self):
        if isinstance(self.right, Const) and self.right.value == 0:
            raise ExpressionError("division by the constant 0")


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 0:
            raise ExpressionError(f"exponent must be a non-negative integer, got {self.exponent}")


Expression = Union[Const, Var, Add, Sub, Mul, Div, Neg, Pow]
_BINARY = (Add, Sub, Mul, Div)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str, line: int, col0: int):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", col0 + len(text.rstrip())))
    return tokens


class _Parser:
    def __init__(self, text: str, line: int, col0: int):
        self.tokens = _tokenize(text, line, col0)
        self.i = 0
        self.line = line

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, self.line, tok[2])

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = (Add if op == "+" else Sub)(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            tok = self.take()
            right = self.factor()
            if tok[1] == "*":
                node = Mul(node, right)
            else:
                if isinstance(right, Const) and right.value == 0:
                    raise self.error("division by the constant 0", tok)
                node = Div(node, right)
        return node

    def factor(self):
        if self.peek() == ("op", "-", self.peek()[2]):
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise self.error("exponent must be an unsigned integer", tok)
            return Pow(base, int(tok[1]))
        return base

    def atom(self):
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            close = self.take()
            if close[1] != ")":
                raise self.error("expected ')'", close)
            return node
        if kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected token {text!r}", tok)


def parse_expr(text: str, line: int = 1, column: int = 1) -> Expression:
    """Parse ``text``; error positions are reported relative to ``line``/``column``."""
    parser = _Parser(text, line, column)
    node = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise parser.error(f"unexpected token {tok[1]!r}")
    return node


# --------------------------------------------------------------- printing

def _wrap(e: Expression) -> str:
    s = to_text(e)
    return s if isinstance(e, (Const, Var)) else f"({s})"


def to_text(e: Expression) -> str:
    """Render ``e`` so that :func:`parse_expr` rebuilds the same tree."""
    if isinstance(e, Const):
        if e.value < 0:
            return f"(-{-e.value!r})"
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-{_wrap(e.operand)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base)}^{e.exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    return f"{_wrap(e.left)} {op} {_wrap(e.right)}"


# ------------------------------------------------------------- evaluation

def variables(e: Expression) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Neg,)):
        return variables(e.operand)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def _check_denominator(den):
    if np.any(np.asarray(den) == 0):
        raise ExpressionError("division by zero")


def eval_expr(e: Expression, env: Mapping[str, object]):
    """Evaluate ``e`` with identifiers bound by ``env``."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExpressionError(f"no value bound for identifier {e.name!r}") from None
    if isinstance(e, Neg):
        return -eval_expr(e.operand, env)
    if isinstance(e, Pow):
        base = eval_expr(e.base, env)
        if e.exponent == 0:
            return np.ones_like(base, dtype=float) if np.ndim(base) else 1.0
        return base**e.exponent
    left = eval_expr(e.left, env)
    right = eval_expr(e.right, env)
    if isinstance(e, Add):
        return left + right
    if isinstance(e, Sub):
        return left - right
    if isinstance(e, Mul):
        return left * right
    _check_denominator(right)
    return left / right


def value_and_partials(e: Expression, wrt: Sequence[str], env: Mapping[str, object]):
    """Value of ``e`` and its exact partial derivatives with respect to ``wrt``.

    Forward-mode differentiation over the tree; returns ``(value, partials)``
    where ``partials`` is a list aligned with ``wrt``.
    """
    n = len(wrt)
    if isinstance(e, Const):
        return e.value, [0.0] * n
    if isinstance(e, Var):
        value = eval_expr(e, env)
        return value, [1.0 if e.name == w else 0.0 for w in wrt]
    if isinstance(e, Neg):
        v, dv = value_and_partials(e.operand, wrt, env)
        return -v, [-x for x in dv]
    if isinstance(e, Pow):
        b, db = value_and_partials(e.base, wrt, env)
        k = e.exponent
        if k == 0:
            return (np.ones_like(b, dtype=float) if np.ndim(b) else 1.0), [0.0] * n
        scale = k * b ** (k - 1)
        return b**k, [scale * x for x in db]
    u, du = value_and_partials(e.left, wrt, env)
    w, dw = value_and_partials(e.right, wrt, env)
    if isinstance(e, Add):
        return u + w, [a + b for a, b in zip(du, dw)]
    if isinstance(e, Sub):
        return u - w, [a - b for a, b in zip(du, dw)]
    if isinstance(e, Mul):
        return u * w, [a * w + u * b for a, b in zip(du, dw)]
    _check_denominator(w)
    return u / w, [(a * w - u * b) / (w * w) for a, b in zip(du, dw)]


def grad_expr(e: Expression, wrt: str, env: Mapping[str, object]):
    """Exact partial derivative of ``e`` with respect to ``wrt``."""
    return value_and_partials(e, [wrt], env)[1][0]


def substitute(e: Expression, bindings: Mapping[str, Expression]) -> Expression:
    """Replace variables by expressions."""
    if isinstance(e, Var):
        return bindings.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, bindings))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, bindings), e.exponent)
    return type(e)(substitute(e.left, bindings), substitute(e.right, bindings))
