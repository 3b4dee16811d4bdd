"""Arithmetic expressions in ``t`` for coefficients and forcing terms.

Grammar, loosest binding first::

    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          right-associative
    atom    := number | "t" | name "(" sum ")" | "(" sum ")"

``-t^2`` is ``-(t^2)`` and ``2^-1`` is allowed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

FUNCTIONS = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
}


class ExprSyntaxError(ValueError):
    """Parse failure at byte ``offset``; ``expected`` lists acceptable tokens."""

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")
        self.offset = offset
        self.expected = expected


class ExprDomainError(ValueError):
    """Evaluation left the domain of an operation."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "t"


@dataclass(frozen=True)
class Neg:
    operand: Expr


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call:
    func: str
    arg: Expr


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)
_ATOM_START = frozenset({"number", "t", "(", "-", *FUNCTIONS})
_AFTER_ATOM = frozenset({"+", "-", "*", "/", "^", ")", "end of input"})


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while text[pos:].strip():
            m = _TOKEN.match(text, pos)
            if m is None:
                bad = len(text) - len(text[pos:].lstrip())
                raise ExprSyntaxError(f"unexpected character {text[bad]!r}", _offset(text, bad), _ATOM_START)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), _offset(text, m.start(kind))))
            pos = m.end()
        self.tokens.append(("end", "", _offset(text, len(text))))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value, expected):
        kind, text, off = self.take()
        if text != value or kind == "end":
            raise ExprSyntaxError(f"unexpected {_describe(kind, text)}", off, expected)

    def parse(self) -> Expr:
        node = self.sum()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {_describe(kind, text)}", off, _AFTER_ATOM - {")"})
        return node

    def sum(self):
        node = self.product()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "t":
                return Var()
            if text in FUNCTIONS:
                self.expect("(", frozenset({"("}))
                arg = self.sum()
                self.expect(")", _AFTER_ATOM - {"end of input"})
                return Call(text, arg)
            raise ExprSyntaxError(f"unknown identifier {text!r}", off, _ATOM_START)
        if (kind, text) == ("op", "("):
            node = self.sum()
            self.expect(")", _AFTER_ATOM - {"end of input"})
            return node
        raise ExprSyntaxError(f"unexpected {_describe(kind, text)}", off, _ATOM_START)


def _offset(text, index):
    return len(text[:index].encode())


def _describe(kind, text):
    return "end of input" if kind == "end" else repr(text)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises:
        ExprSyntaxError: with the byte offset of the offending token and the
            set of tokens that would have been accepted there.
    """
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return _PREC["neg"]
    return 5


def _wrap(node, ok):
    text = to_string(node)
    return text if ok else f"({text})"


def _num(value: float) -> str:
    if math.isinf(value) or math.isnan(value):
        raise ValueError(f"cannot print non-finite literal {value}")
    text = repr(value)
    return text[:-2] if text.endswith(".0") and "e" not in text else text


def to_string(node: Expr) -> str:
    """Print with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return _num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _prec(node.operand) >= _PREC["neg"])
    p = _PREC[node.op]
    if node.op == "^":
        left = _wrap(node.left, _prec(node.left) > p)
        right = _wrap(node.right, _prec(node.right) >= _PREC["neg"])
        return f"{left}^{right}"
    left = _wrap(node.left, _prec(node.left) >= p)
    right = _wrap(node.right, _prec(node.right) > p)
    return f"{left} {node.op} {right}"


def evaluate(node: Expr, t: float) -> float:
    """Evaluate at ``t``.

    Raises:
        ExprDomainError: division by zero, ``ln``/``sqrt`` outside their
            domain, a non-real power, or overflow.
    """
    try:
        return _eval(node, t)
    except ZeroDivisionError:
        raise ExprDomainError(f"division by zero at t={t!r}") from None
    except OverflowError:
        raise ExprDomainError(f"overflow at t={t!r}") from None


def _eval(node, t):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Call):
        x = _eval(node.arg, t)
        if node.func == "ln" and x <= 0:
            raise ExprDomainError(f"ln of non-positive value {x!r} at t={t!r}")
        if node.func == "sqrt" and x < 0:
            raise ExprDomainError(f"sqrt of negative value {x!r} at t={t!r}")
        return FUNCTIONS[node.func](x)
    a, b = _eval(node.left, t), _eval(node.right, t)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    if a < 0 and b != int(b):
        raise ExprDomainError(f"non-integer power of negative base at t={t!r}")
    if a == 0 and b < 0:
        raise ZeroDivisionError
    r = a**b
    if isinstance(r, complex):
        raise ExprDomainError(f"complex power at t={t!r}")
    return float(r)


def compile_expr(text: str):
    """Parse ``text`` and return ``t -> value``."""
    node = parse_expr(text)
    return lambda t: evaluate(node, t)
