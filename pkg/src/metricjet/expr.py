"""A small vectorized expression language for user-supplied maps.

Grammar, loosest binding first::

    expr    := 'if' expr 'then' expr 'else' expr | or
    or      := and ('or' and)*
    and     := not ('and' not)*
    not     := 'not' not | cmp
    cmp     := sum (('<' | '<=' | '>' | '>=' | '==' | '!=') sum)?
    sum     := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom (('^' | '**') unary)?
    atom    := number | name | name '(' args ')' | '(' expr ')'

A top-level comma list gives a vector-valued map. Variables are ``x1..xn``
(``x`` is ``x1``); constants ``pi`` and ``e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .handles import FunctionHandle


class ParseError(ValueError):
    pass


def _pow(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.power(np.abs(a), b) * np.where(a < 0, np.nan, 1.0)
    # odd-denominator roots of negatives are not real here; integer powers are
    ints = np.isclose(b, np.round(b)) & (a < 0)
    if ints.any():
        out = np.where(ints, np.power(a, np.round(b)), out)
    return out


FUNCS: dict[str, tuple[Callable, int]] = {
    "sin": (np.sin, 1),
    "cos": (np.cos, 1),
    "tan": (np.tan, 1),
    "log": (np.log, 1),
    "exp": (np.exp, 1),
    "abs": (np.abs, 1),
    "sign": (np.sign, 1),
    "sqrt": (np.sqrt, 1),
    "cbrt": (np.cbrt, 1),
    "floor": (np.floor, 1),
    "min": (np.minimum, -1),
    "max": (np.maximum, -1),
    "pow": (_pow, 2),
}
CONSTS = {"pi": np.pi, "e": np.e}

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\*\*|<=|>=|==|!=|[-+*/^(),<>]))")


def tokenize(src: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos:].strip()[:1]!r} at offset {pos}")
        num, name, op = m.groups()
        out.append(("num", num) if num else ("name", name) if name else ("op", op))
        pos = m.end()
    out.append(("end", ""))
    return out


Node = tuple


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.max_var = 0

    def peek(self) -> tuple[str, str]:
        return self.toks[self.i]

    def take(self, kind: str | None = None, text: str | None = None) -> tuple[str, str]:
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (text is not None and tok[1] != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, *texts: str) -> bool:
        kind, text = self.peek()
        return kind in ("op", "name") and text in texts

    def top(self) -> list[Node]:
        items = [self.expr()]
        while self.at(","):
            self.take()
            items.append(self.expr())
        self.take("end")
        return items

    def expr(self) -> Node:
        if self.at("if"):
            self.take()
            c = self.expr()
            self.take("name", "then")
            a = self.expr()
            self.take("name", "else")
            b = self.expr()
            return ("if", c, a, b)
        return self.binary(0)

    _LEVELS = [("or",), ("and",)]

    def binary(self, level: int) -> Node:
        if level == 2:
            return self.negation()
        node = self.binary(level + 1)
        while self.at(*self._LEVELS[level]):
            op = self.take()[1]
            node = (op, node, self.binary(level + 1))
        return node

    def negation(self) -> Node:
        if self.at("not"):
            self.take()
            return ("not", self.negation())
        return self.comparison()

    def comparison(self) -> Node:
        node = self.sum()
        if self.at("<", "<=", ">", ">=", "==", "!="):
            op = self.take()[1]
            node = (op, node, self.sum())
        return node

    def sum(self) -> Node:
        node = self.term()
        while self.at("+", "-"):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*", "/"):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at("-", "+"):
            op = self.take()[1]
            inner = self.unary()
            return ("neg", inner) if op == "-" else inner
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^", "**"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text = self.take()
        if kind == "num":
            return ("num", float(text))
        if kind == "op" and text == "(":
            node = self.expr()
            self.take("op", ")")
            return node
        if kind != "name":
            raise ParseError(f"unexpected {text or 'end of input'!r}")
        if self.at("("):
            if text not in FUNCS:
                raise ParseError(f"unknown function {text!r}")
            self.take()
            args = [self.expr()]
            while self.at(","):
                self.take()
                args.append(self.expr())
            self.take("op", ")")
            arity = FUNCS[text][1]
            if (arity > 0 and len(args) != arity) or (arity < 0 and len(args) < 2):
                raise ParseError(f"{text} takes {arity if arity > 0 else 'two or more'} arguments")
            return ("call", text, args)
        if text in CONSTS:
            return ("num", CONSTS[text])
        m = re.fullmatch(r"x(\d*)", text)
        if m:
            idx = int(m.group(1) or 1)
            if idx < 1:
                raise ParseError("variables are numbered from x1")
            self.max_var = max(self.max_var, idx)
            return ("var", idx - 1)
        raise ParseError(f"unknown name {text!r}")


_BIN = {
    "+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": _pow,
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
    "==": np.equal, "!=": np.not_equal, "and": np.logical_and, "or": np.logical_or,
}


def _eval(node: Node, X: np.ndarray):
    tag = node[0]
    if tag == "num":
        return np.full(len(X), node[1])
    if tag == "var":
        return X[:, node[1]]
    if tag == "neg":
        return -_eval(node[1], X)
    if tag == "not":
        return np.logical_not(_eval(node[1], X))
    if tag == "if":
        cond = np.asarray(_eval(node[1], X), dtype=bool)
        return np.where(cond, _eval(node[2], X), _eval(node[3], X))
    if tag == "call":
        fn, arity = FUNCS[node[1]]
        args = [_eval(a, X) for a in node[2]]
        if arity < 0:
            out = args[0]
            for a in args[1:]:
                out = fn(out, a)
            return out
        return fn(*args)
    return _BIN[tag](_eval(node[1], X), _eval(node[2], X))


@dataclass
class ExprFunction:
    source: str
    items: list[Node]
    dim_in: int
    overrides: dict[tuple[float, ...], tuple[float, ...]] = field(default_factory=dict)

    @property
    def dim_out(self) -> int:
        return len(self.items)

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim_in:
            raise ValueError(f"expected points of dimension {self.dim_in}, got {X.shape[1]}")
        with np.errstate(all="ignore"):
            out = np.stack([np.asarray(_eval(n, X), dtype=float) for n in self.items], axis=1)
        for pt, val in self.overrides.items():
            hit = np.all(X == np.asarray(pt), axis=1)
            out[hit] = val
        return out

    def handle(self) -> FunctionHandle:
        def dom(X: np.ndarray) -> np.ndarray:
            return np.all(np.isfinite(self.evaluate(X)), axis=1)

        return FunctionHandle(self.dim_in, self.dim_out, self.evaluate, dom, self.source)


def parse_expression(source: str, dim: int | None = None, value_at_0=None) -> ExprFunction:
    """Parse ``source``; ``value_at_0`` (scalar or sequence) overrides the value at the origin."""
    p = _Parser(source)
    items = p.top()
    n = max(p.max_var, 1) if dim is None else dim
    if p.max_var > n:
        raise ParseError(f"expression uses x{p.max_var} but the dimension is {n}")
    fn = ExprFunction(source, items, n)
    if value_at_0 is not None:
        val = tuple(float(v) for v in np.atleast_1d(value_at_0))
        if len(val) != fn.dim_out:
            raise ParseError("override value does not match the output dimension")
        fn.overrides[(0.0,) * n] = val
    return fn
