"""Small arithmetic grammar for reaction terms, evaluated with forward-mode
derivatives so that ``f'`` comes for free.

Grammar: numbers, ``pi``, ``e``, the variable ``u``, ``+ - * / ^`` (``**``
also accepted), unary minus, and the functions ``exp``, ``sin``, ``cos``.
Errors carry the character offset of the offending token.
"""

from __future__ import annotations

import ast
import math
import re
from typing import Callable

import numpy as np

from .errors import ExpressionParseError

_FUNCS: dict[str, tuple[Callable, Callable]] = {
    "exp": (np.exp, np.exp),
    "sin": (np.sin, np.cos),
    "cos": (np.cos, lambda x: -np.sin(x)),
}
_CONSTS = {"pi": math.pi, "e": math.e}


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(\*\*|[-+*/^(),])|([A-Za-z_]\w*))")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExpressionParseError(f"unexpected character {source[bad]!r}", bad)
        kind = "num" if m.group(1) else ("op" if m.group(2) else "name")
        text = m.group(1) or m.group(2) or m.group(3)
        tokens.append((kind, "^" if text == "**" else text, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    """expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
    unary := '-' unary | power; power := atom ('^' unary)?"""

    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> ast.AST:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionParseError(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = ast.Add() if self.take()[1] == "+" else ast.Sub()
            node = ast.BinOp(node, op, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = ast.Mult() if self.take()[1] == "*" else ast.Div()
            node = ast.BinOp(node, op, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return ast.UnaryOp(ast.USub(), self.unary())
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            node = ast.BinOp(node, ast.Pow(), self.unary())
        return node

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return ast.Constant(float(text))
        if kind == "name":
            if text in _FUNCS:
                if self.peek()[:2] != ("op", "("):
                    raise ExpressionParseError(f"expected '(' after {text}", self.peek()[2])
                self.take()
                arg = self.expr()
                self.expect(")")
                return ast.Call(ast.Name(text), [arg], [])
            if text == "u" or text in _CONSTS:
                return ast.Name(text)
            raise ExpressionParseError(f"unknown name {text!r}", pos)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExpressionParseError(f"unexpected {what}", pos)

    def expect(self, text: str) -> None:
        kind, got, pos = self.take()
        if got != text or kind != "op":
            raise ExpressionParseError(f"expected {text!r}", pos)


def _eval(node: ast.AST, u):
    """Return (value, derivative, is_constant)."""
    if isinstance(node, ast.Expression):
        return _eval(node.body, u)
    if isinstance(node, ast.Constant):
        return float(node.value), 0.0, True
    if isinstance(node, ast.Name):
        if node.id == "u":
            return u, np.ones_like(u), False
        return _CONSTS[node.id], 0.0, True
    if isinstance(node, ast.UnaryOp):
        v, d, c = _eval(node.operand, u)
        return (-v, -d, c) if isinstance(node.op, ast.USub) else (v, d, c)
    if isinstance(node, ast.Call):
        fn, dfn = _FUNCS[node.func.id]
        v, d, c = _eval(node.args[0], u)
        return fn(v), dfn(v) * d, c
    assert isinstance(node, ast.BinOp)
    a, da, ca = _eval(node.left, u)
    b, db, cb = _eval(node.right, u)
    op = node.op
    if isinstance(op, ast.Add):
        return a + b, da + db, ca and cb
    if isinstance(op, ast.Sub):
        return a - b, da - db, ca and cb
    if isinstance(op, ast.Mult):
        return a * b, da * b + a * db, ca and cb
    if isinstance(op, ast.Div):
        return a / b, (da * b - a * db) / (b * b), ca and cb
    # power
    if cb:
        val = np.power(a, b) if not ca else a ** b
        # b = 0 is special-cased so that 0 * 0^-1 does not poison u = 0
        der = 0.0 if ca or b == 0 else b * np.power(a, b - 1.0) * da
        return val, der, ca
    val = np.power(a, b)
    return val, val * (db * np.log(a) + b * da / a), False


class Expression:
    """Compiled expression in the variable ``u``."""

    def __init__(self, source: str):
        self.source = source
        self._tree = ast.Expression(_Parser(source).parse())

    def _value_and_derivative(self, u):
        arr = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            v, d, _ = _eval(self._tree, arr)
        v = np.broadcast_to(np.asarray(v, dtype=float), arr.shape).copy()
        d = np.broadcast_to(np.asarray(d, dtype=float), arr.shape).copy()
        if np.ndim(u) == 0:
            return float(v), float(d)
        return v, d

    def __call__(self, u):
        return self._value_and_derivative(u)[0]

    def derivative(self, u):
        return self._value_and_derivative(u)[1]

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"
