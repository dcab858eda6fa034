"""Arithmetic expressions in the state variables x1, x2, x3.

Grammar (whitespace insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := number | 'x1' | 'x2' | 'x3' | '(' expr ')' | '-' base
    number := int ('/' uint)? | decimal

Constants are stored as exact rationals and evaluated in double precision,
so coefficients like 23/100 carry no decimal-entry drift.  There is no
division operator: '/' is only legal inside a numeric literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "Expr", "Num", "Var", "Neg", "Add", "Sub", "Mul", "Pow",
    "ExpressionError", "parse_expr", "num",
]

VAR_NAMES = ("x1", "x2", "x3")


class ExpressionError(ValueError):
    """Malformed expression; `pos` is the 0-based column of the offence."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


class Expr:
    """Base node.  Trees are immutable and shareable."""

    def evaluate(self, x1: float, x2: float, x3: float) -> float:
        raise NotImplementedError

    def source(self) -> str:
        """Python source fragment used by the compiled evaluators."""
        raise NotImplementedError

    def __str__(self) -> str:
        return _print(self, 0)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction

    def evaluate(self, x1, x2, x3):
        return float(self.value)

    def source(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1..3

    def evaluate(self, x1, x2, x3):
        return (x1, x2, x3)[self.index - 1]

    def source(self):
        return VAR_NAMES[self.index - 1]


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def evaluate(self, x1, x2, x3):
        return -self.arg.evaluate(x1, x2, x3)

    def source(self):
        return f"(-{self.arg.source()})"


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def evaluate(self, x1, x2, x3):
        return self.left.evaluate(x1, x2, x3) + self.right.evaluate(x1, x2, x3)

    def source(self):
        return f"({self.left.source()}+{self.right.source()})"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def evaluate(self, x1, x2, x3):
        return self.left.evaluate(x1, x2, x3) - self.right.evaluate(x1, x2, x3)

    def source(self):
        return f"({self.left.source()}-{self.right.source()})"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def evaluate(self, x1, x2, x3):
        return self.left.evaluate(x1, x2, x3) * self.right.evaluate(x1, x2, x3)

    def source(self):
        return f"({self.left.source()}*{self.right.source()})"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int  # >= 0

    def evaluate(self, x1, x2, x3):
        return self.base.evaluate(x1, x2, x3) ** self.exponent

    def source(self):
        return f"({self.base.source()}**{self.exponent})"


def num(value) -> Expr:
    """Exact constant node; negatives become an explicit unary minus so the
    printed form stays inside the grammar."""
    f = Fraction(value)
    if f < 0:
        return Neg(Num(-f))
    return Num(f)


# ---------------------------------------------------------------- printing

# precedence: sum=1, product=2, power-base/unary operand=4, atom=5
_PREC = {Add: 1, Sub: 1, Mul: 2, Pow: 3, Neg: 4, Num: 5, Var: 5}


def _print(e: Expr, need: int) -> str:
    p = _PREC[type(e)]
    if isinstance(e, Num):
        v = e.value
        s = f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    elif isinstance(e, Var):
        s = VAR_NAMES[e.index - 1]
    elif isinstance(e, Neg):
        s = "-" + _print(e.arg, 4)
    elif isinstance(e, Add):
        # right operand sits one level down the grammar, so equal-precedence
        # right children keep their parentheses and the tree round-trips
        s = _print(e.left, 1) + "+" + _print(e.right, 2)
    elif isinstance(e, Sub):
        s = _print(e.left, 1) + "-" + _print(e.right, 2)
    elif isinstance(e, Mul):
        s = _print(e.left, 2) + "*" + _print(e.right, 3)
    elif isinstance(e, Pow):
        s = _print(e.base, 4) + "^" + str(e.exponent)
    else:
        raise TypeError(type(e))
    if p < need:
        return "(" + s + ")"
    return s


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|([-+*^()/]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            # skip leading blanks that the regex may not have consumed
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = len(text) - len(stripped)
            raise ExpressionError(f"unexpected character {text[bad]!r}", text, bad)
        number, name, op = m.groups()
        tok_pos = m.end() - len(m.group().lstrip())
        if number is not None:
            tokens.append(("num", number, tok_pos))
        elif name is not None:
            tokens.append(("name", name, tok_pos))
        else:
            tokens.append((op, op, tok_pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ExpressionError(message, self.text, tok[2])

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, _ = self.peek()
        if kind != "end":
            self.error(f"unexpected {val!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] == "*":
            self.advance()
            e = Mul(e, self.factor())
        return e

    def factor(self) -> Expr:
        e = self.base()
        if self.peek()[0] == "^":
            self.advance()
            kind, val, _ = self.peek()
            if kind != "num" or "." in val:
                self.error("exponent must be a non-negative integer")
            self.advance()
            e = Pow(e, int(val))
        return e

    def base(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "num":
            self.advance()
            return Num(self._number(val, pos))
        if kind == "name":
            self.advance()
            if val in VAR_NAMES:
                return Var(VAR_NAMES.index(val) + 1)
            self.error(f"unknown identifier {val!r}", (kind, val, pos))
        if kind == "(":
            self.advance()
            e = self.expr()
            if self.peek()[0] != ")":
                self.error("expected ')'")
            self.advance()
            return e
        if kind == "-":
            self.advance()
            return Neg(self.base())
        self.error(f"expected a value, got {val!r}" if val else "unexpected end of expression")

    def _number(self, text: str, pos: int) -> Fraction:
        if "." in text:
            if self.peek()[0] == "/":
                self.error("'/' is only allowed after an integer literal")
            t = text
            if t.startswith("."):
                t = "0" + t
            if t.endswith("."):
                t += "0"
            return Fraction(t)
        value = Fraction(int(text))
        if self.peek()[0] == "/":
            self.advance()
            kind, den, dpos = self.peek()
            if kind != "num" or "." in den:
                self.error("denominator must be an unsigned integer")
            if int(den) == 0:
                self.error("zero denominator", (kind, den, dpos))
            self.advance()
            value /= int(den)
        return value


def parse_expr(text: str) -> Expr:
    """Parse one expression; raises ExpressionError with a position on failure."""
    return _Parser(text).parse()
