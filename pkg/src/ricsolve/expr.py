"""Tiny arithmetic expression language for coefficient strings.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER ['i'] | 'i' | 'x' | 'pi' | 'e'
            | FUNC '(' expr ')' | '(' expr ')'

Parsing yields a callable of the node array, e.g. ``compile_expr("2*cos(x) - 1i")``.
"""
from __future__ import annotations

import re
from typing import Callable

import numpy as np

from .errors import ExpressionError

FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "abs": np.abs,
}
CONSTS = {"pi": np.pi, "e": np.e, "i": 1j}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(src: str) -> list[tuple[str, str, int]]:
    pos, out = 0, []
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ExpressionError(f"unexpected character {src[pos:].lstrip()[:1]!r} at {pos} in {src!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


Node = Callable[[np.ndarray], object]


class Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            got = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r} at {pos}, got {got} in {self.src!r}")

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {val!r} at {pos} in {self.src!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _bin(op, node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _bin(op, node, rhs)
        return node

    def unary(self) -> Node:
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return lambda x: -inner(x)
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            exp = self.unary()
            return _bin("^", base, exp)
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            v = complex(0, float(val[:-1])) if val.endswith("i") else float(val)
            return lambda x: v
        if kind == "name":
            if val == "x":
                return lambda x: x
            if val in FUNCS and self.peek()[1] == "(":
                fn = FUNCS[val]
                self.take()
                arg = self.expr()
                self.expect(")")
                return lambda x: fn(arg(x))
            if val in CONSTS:
                c = CONSTS[val]
                return lambda x: c
            raise ExpressionError(f"unknown name {val!r} at {pos} in {self.src!r}")
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(val)
        raise ExpressionError(f"unexpected {got} at {pos} in {self.src!r}")


def _bin(op: str, a: Node, b: Node) -> Node:
    if op == "+":
        return lambda x: a(x) + b(x)
    if op == "-":
        return lambda x: a(x) - b(x)
    if op == "*":
        return lambda x: a(x) * b(x)
    if op == "/":
        return lambda x: a(x) / b(x)
    return lambda x: _pow(a(x), b(x))


def _pow(a, b):
    # integer exponents stay exact on negative reals; everything else goes complex
    if np.isscalar(b) and float(np.real(b)).is_integer() and np.imag(b) == 0:
        return a ** int(np.real(b))
    return np.power(np.asarray(a, dtype=complex), b)


def compile_expr(src: str) -> Node:
    if not src.strip():
        raise ExpressionError("empty expression")
    return Parser(src).parse()


def evaluate(src: str, x=0.0):
    """Evaluate ``src`` at ``x`` (scalar or array)."""
    with np.errstate(all="ignore"):
        return compile_expr(src)(x)
