"""Recursive-descent parser for the polynomial text format.

Accepted syntax::

    expr   := ["+"|"-"] term (("+"|"-") term)*
    term   := unary (("*"|"/") unary)*
    unary  := "-" unary | factor
    factor := base ("^" uint | "^(" uint ")")?
    base   := var | "conj(" expr ")" | "i" | uint | "(" expr ")"

Division is only allowed by expressions that evaluate to a nonzero
constant, which covers both rationals like ``3/5`` and ``/(2*i)``.
Variables: ``z1..zN``, ``w1..wM``, ``u`` (or ``u1..``), ``s1..sd``, ``t``
(or ``t1..``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .gaussian import I
from .poly import Poly, Variable

__all__ = ["PolySyntaxError", "VariableContext", "parse_poly", "parse_variable"]


class PolySyntaxError(ValueError):
    """Raised on malformed polynomial text; carries a 0-based ``position``."""

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.message = message
        self.text = text
        self.position = position
        line = text.count("\n", 0, position) + 1
        col = position - (text.rfind("\n", 0, position) + 1) + 1
        self.line = line
        self.column = col
        super().__init__(f"{message} at line {line}, column {col}")


@dataclass(frozen=True)
class VariableContext:
    """Declared variable ranges; ``None`` means unrestricted."""

    z: Optional[int] = None
    w: Optional[int] = None
    s: Optional[int] = None
    u: Optional[int] = None
    t: Optional[int] = None

    def allows(self, kind: str, index: int) -> bool:
        limit = getattr(self, kind)
        return limit is None or 1 <= index <= limit


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")
_VAR = re.compile(r"^([zwust])(\d*)$")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break  # trailing whitespace
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def parse_variable(name: str, context: VariableContext = VariableContext(),
                   text: str = "", position: int = 0) -> Variable:
    m = _VAR.match(name)
    if not m:
        raise PolySyntaxError(f"unknown variable {name!r}", text, position)
    kind, digits = m.groups()
    if not digits:
        if kind not in ("u", "t"):
            raise PolySyntaxError(f"unknown variable {name!r}", text, position)
        index = 1
    else:
        index = int(digits)
        if index < 1:
            raise PolySyntaxError(f"unknown variable {name!r}", text, position)
    if not context.allows(kind, index):
        raise PolySyntaxError(f"unknown variable {name!r}", text, position)
    return Variable(kind, index)


class _Parser:
    def __init__(self, text: str, context: VariableContext):
        self.text = text
        self.context = context
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolySyntaxError(msg, self.text, tok[2])

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected {op!r}", tok)
        return tok

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            self.error("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if tok[1] == "+" else acc - rhs
            else:
                return acc

    def term(self) -> Poly:
        acc = self.unary()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                acc = acc * self.unary()
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                rhs = self.unary()
                if not rhs.is_constant() or rhs.is_zero():
                    self.error("division by a non-constant or zero expression", tok)
                acc = acc / rhs.constant_term()
            else:
                return acc

    def unary(self) -> Poly:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return -self.unary()
        return self.factor()

    def factor(self) -> Poly:
        base = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return base ** self.exponent()
        return base

    def exponent(self) -> int:
        tok = self.take()
        if tok[0] == "num":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == ".":
                self.error("non-integer exponent", nxt)
            return int(tok[1])
        if tok[0] == "op" and tok[1] == "(":
            num = self.take()
            if num[0] != "num":
                self.error("non-integer exponent", num)
            close = self.take()
            if close[0] != "op" or close[1] != ")":
                self.error("non-integer exponent", close)
            return int(num[1])
        if tok[0] == "op" and tok[1] == "-":
            self.error("non-integer exponent", tok)
        self.error("expected exponent", tok)

    def base(self) -> Poly:
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return Poly.const(int(val))
        if kind == "name":
            if val == "i":
                return Poly.const(I)
            if val == "conj":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return inner.conj()
            return Poly.var(parse_variable(val, self.context, self.text, tok[2]))
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {val!r}", tok)


def parse_poly(text: str, context: VariableContext | None = None) -> Poly:
    """Parse ``text`` into an exact :class:`~crlab.poly.Poly`.

    >>> str(parse_poly("z1*conj(z1)"))
    'z1*conj(z1)'
    """
    if not isinstance(text, str):
        raise TypeError("polynomial text must be a string")
    return _Parser(text, context or VariableContext()).parse()


def parse_poly_list(texts: List[str], context: VariableContext | None = None) -> List[Poly]:
    return [parse_poly(t, context) for t in texts]
