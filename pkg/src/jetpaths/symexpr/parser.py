"""Recursive-descent parser for the jet expression grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' exponent)?
    exponent := ['-'] NUMBER | '(' expr ')'      # must fold to a rational
    atom   := NUMBER | 'y' INT '_' INT | 'sqrt' '(' expr ')' | '(' expr ')'

Numbers may be integers, decimals (``1.25``, read exactly) or are built
into rationals by ``/``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .core import Const, Expr, Var, add, div, mul, neg, power, sub


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class IndexRangeError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<var>y(?P<vi>\d+)_(?P<vr>\d+))"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", start, text)
        start = pos + len(text[pos:m.end()]) - len(text[pos:m.end()].lstrip())
        if m.group("num") is not None:
            toks.append(("num", Fraction(m.group("num")), start))
        elif m.group("var") is not None:
            toks.append(("var", (int(m.group("vi")), int(m.group("vr"))), start))
        elif m.group("name") is not None:
            toks.append(("name", m.group("name"), start))
        else:
            toks.append(("op", m.group("op"), start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text, m, max_order):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0
        self.m = m
        self.max_order = max_order

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise ExprSyntaxError(f"expected {op!r}", t[2], self.text)

    def is_op(self, *ops):
        t = self.peek()
        return t[0] == "op" and t[1] in ops

    def expr(self) -> Expr:
        e = self.term()
        while self.is_op("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.is_op("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                e = mul(e, rhs)
            else:
                if isinstance(rhs, Const) and rhs.value == 0:
                    raise ExprSyntaxError("division by literal zero", self.toks[self.k - 1][2], self.text)
                e = div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.is_op("-"):
            self.take()
            return neg(self.unary())
        if self.is_op("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.is_op("^"):
            self.take()
            base = power(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        t = self.peek()
        sign = 1
        if self.is_op("-"):
            self.take()
            sign = -1
            t = self.peek()
        if t[0] == "num":
            self.take()
            return sign * t[1]
        if self.is_op("("):
            self.take()
            e = self.expr()
            self.expect(")")
            if not isinstance(e, Const):
                raise ExprSyntaxError("exponent must be a rational constant", t[2], self.text)
            return sign * e.value
        raise ExprSyntaxError("expected exponent", t[2], self.text)

    def atom(self) -> Expr:
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return Const(val)
        if kind == "var":
            i, r = val
            if not 1 <= i <= self.m:
                raise IndexRangeError(f"component index {i} outside 1..{self.m} at position {pos}")
            if not 0 <= r <= self.max_order:
                raise IndexRangeError(f"jet level {r} outside 0..{self.max_order} at position {pos}")
            return Var(i, r)
        if kind == "name":
            if val != "sqrt":
                raise ExprSyntaxError(f"unknown function {val!r}", pos, self.text)
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return power(e, Fraction(1, 2))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos, self.text)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos, self.text)


def parse(text: str, m: int = 9, max_order: int = 99) -> Expr:
    """Parse ``text`` into an expression over y^i_r with i <= m, r <= max_order.

    >>> str(parse("sqrt(y1_1^2 + y2_1^2)", m=2, max_order=1))
    '(y1_1^2 + y2_1^2)^(1/2)'
    """
    p = _Parser(text, m, max_order)
    e = p.expr()
    t = p.peek()
    if t[0] != "end":
        raise ExprSyntaxError(f"unexpected token {t[1]!r}", t[2], text)
    return e
