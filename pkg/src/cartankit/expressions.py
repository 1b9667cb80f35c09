"""Tiny arithmetic grammar for inline form coefficients.

Supported: ``+ - * /``, unary minus, parentheses, the functions ``sin``,
``cos``, ``exp``, numeric literals, ``pi``, and the domain coordinate
variables handed to the compiler. Compiled expressions are vectorized
numpy callables over stacked coordinate arrays.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)"
                    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*/()]))")

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_CONSTANTS = {"pi": math.pi}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad character at position {pos} in {text!r}")
        if m.lastgroup == "num":
            out.append(("num", float(m.group("num")), pos))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name"), pos))
        else:
            out.append(("op", m.group("op"), pos))
        pos = m.end()
    out.append(("end", None, pos))
    return out


class _Parser:
    def __init__(self, tokens, variables, text):
        self.tokens = tokens
        self.i = 0
        self.variables = variables
        self.text = text

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        kind, val, pos = self.advance()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} at position {pos} in {self.text!r}")

    def parse(self):
        node = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input at position {pos} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            _, op, _ = self.advance()
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            _, op, _ = self.advance()
            node = ("bin", op, node, self.factor())
        return node

    def factor(self):
        kind, val, pos = self.peek()
        if (kind, val) == ("op", "-"):
            self.advance()
            return ("neg", self.factor())
        return self.atom()

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            if val in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            if val in _CONSTANTS:
                return ("num", _CONSTANTS[val])
            if val in self.variables:
                return ("var", self.variables.index(val))
            raise ParseError(f"unknown name {val!r} at position {pos}; "
                             f"variables here: {self.variables}")
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token at position {pos} in {self.text!r}")


def _eval(node, pts):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return pts[..., node[1]]
    if kind == "neg":
        return -_eval(node[1], pts)
    if kind == "call":
        return _FUNCTIONS[node[1]](_eval(node[2], pts))
    _, op, left, right = node
    a = _eval(left, pts)
    b = _eval(right, pts)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b


def compile_expression(text: str, variables):
    """Compile one expression into ``pts (..., sigma) -> (...)``."""
    variables = list(variables)
    node = _Parser(_tokenize(text), variables, text).parse()

    def fn(pts):
        pts = np.asarray(pts)
        out = _eval(node, pts)
        return np.broadcast_to(out, pts.shape[:-1]).copy() \
            if np.ndim(out) != pts.ndim - 1 else out

    return fn


def coordinate_names(sigma: int):
    """Variable names for a domain: x, y, z plus t as an alias in 1-D."""
    names = ["x", "y", "z"][:sigma]
    if sigma == 1:
        names = ["t", "x"]  # both resolve to the single coordinate
    return names


def compile_form_coeffs(rows, sigma: int):
    """Compile a [sigma][d] table of coefficient expressions into one
    evaluator ``pts -> (..., sigma, d)``."""
    names = coordinate_names(sigma)
    compiled = [[compile_expression(text, names) for text in row]
                for row in rows]

    def evaluator(pts):
        pts = np.asarray(pts)
        # in 1-D both t and x alias coordinate 0
        eval_pts = np.concatenate([pts, pts], axis=-1) if sigma == 1 else pts
        cols = [[fn(eval_pts) for fn in row] for row in compiled]
        return np.stack([np.stack(row, axis=-1) for row in cols], axis=-2)

    return evaluator
