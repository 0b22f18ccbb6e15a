"""Recursive-descent parser for the textual expression grammar.

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary | '/' unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' exponent)?
    atom   := number | u[i,s] | t[i,s] | z | d(expr) | '(' expr ')'

``u[i]`` and ``t[i]`` abbreviate jet order 0.  ``d(expr)`` is the total
derivative.  Division is only allowed by constants or single monomials.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, UnknownVariable
from .ring import SuperPoly, mul, power, total_derivative

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Lexer:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(0).strip() == "":
                pos = m.end()
                continue
            start = m.start(m.lastindex)
            if m.group(1) is not None:
                self.toks.append(("num", m.group(1), start))
            elif m.group(2) is not None:
                self.toks.append(("name", m.group(2), start))
            else:
                self.toks.append(("op", m.group(3), start))
            pos = m.end()
        self.i = 0

    def where(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg, pos=None, cls=ParseError):
        if pos is None:
            pos = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)
        line, col = self.where(pos)
        raise cls(msg, line, col, self.text)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value):
        kind, v, pos = self.peek()
        if v != value:
            self.error(f"expected {value!r}, found {v if v is not None else 'end of input'!r}")
        return self.take()


class _Parser:
    def __init__(self, text, n):
        self.lx = _Lexer(text)
        self.n = n or 1

    def parse(self):
        if not self.lx.toks:
            self.lx.error("empty expression")
        e = self.expr()
        if self.lx.peek()[0] is not None:
            self.lx.error(f"unexpected {self.lx.peek()[1]!r}")
        return e

    def expr(self):
        acc = self.term()
        while self.lx.peek()[1] in ("+", "-"):
            op = self.lx.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.lx.peek()[1] in ("*", "/"):
            op, pos = self.lx.take()[1], self.lx.peek()[2]
            rhs = self.unary()
            if op == "*":
                acc = mul(acc, rhs)
            else:
                if not rhs.terms:
                    self.lx.error("division by zero", pos)
                if len(rhs.terms) != 1:
                    self.lx.error("can only divide by a single term", pos)
                acc = mul(acc, power(rhs, -1))
        return acc

    def unary(self):
        kind, v, pos = self.lx.peek()
        if v == "-":
            self.lx.take()
            return -self.unary()
        if v == "+":
            self.lx.take()
            return self.unary()
        return self.power_()

    def exponent(self):
        kind, v, pos = self.lx.peek()
        if kind == "num":
            self.lx.take()
            return Fraction(int(v))
        if v == "(":
            self.lx.take()
            sign = 1
            if self.lx.peek()[1] == "-":
                self.lx.take()
                sign = -1
            kind, v, pos = self.lx.take()
            if kind != "num":
                self.lx.error("expected an integer in the exponent", pos)
            val = Fraction(int(v))
            if self.lx.peek()[1] == "/":
                self.lx.take()
                kind, w, pos = self.lx.take()
                if kind != "num" or int(w) == 0:
                    self.lx.error("bad exponent denominator", pos)
                val = val / int(w)
            self.lx.expect(")")
            return sign * val
        if v == "-":
            self.lx.take()
            return -self.exponent()
        self.lx.error("expected an exponent")

    def power_(self):
        base = self.atom()
        if self.lx.peek()[1] == "^":
            pos = self.lx.take()[2]
            e = self.exponent()
            try:
                base = power(base, e)
            except Exception as exc:  # not representable etc.
                self.lx.error(str(exc), pos)
        return base

    def index(self):
        self.lx.expect("[")
        kind, v, pos = self.lx.take()
        if kind != "num" or int(v) < 1:
            self.lx.error("component index must be a positive integer", pos)
        i = int(v)
        s = 0
        if self.lx.peek()[1] == ",":
            self.lx.take()
            kind, w, pos = self.lx.take()
            if kind != "num":
                self.lx.error("jet order must be a nonnegative integer", pos)
            s = int(w)
        self.lx.expect("]")
        return i, s

    def atom(self):
        kind, v, pos = self.lx.peek()
        if kind == "num":
            self.lx.take()
            return SuperPoly.const(int(v), self.n)
        if v == "(":
            self.lx.take()
            e = self.expr()
            self.lx.expect(")")
            return e
        if kind == "name":
            self.lx.take()
            if v == "u":
                i, s = self.index()
                return SuperPoly.u(i, s, self.n)
            if v == "t":
                i, s = self.index()
                return SuperPoly.theta(i, s, self.n)
            if v == "z":
                return SuperPoly.zeta(self.n)
            if v == "d":
                self.lx.expect("(")
                e = self.expr()
                self.lx.expect(")")
                return total_derivative(e, self.n)
            self.lx.error(f"unknown variable {v!r}", pos, UnknownVariable)
        self.lx.error(f"unexpected {v if v is not None else 'end of input'!r}")


def parse_expression(text: str, n: int | None = None) -> SuperPoly:
    p = _Parser(text, n)
    out = p.parse()
    return out.with_n(n or 1)
