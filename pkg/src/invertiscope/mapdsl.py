"""Coordinate-expression maps R^n -> R^n with forward-mode derivatives.

Grammar::

    map    := "n=" int ";" line*
    line   := "f" int "=" expr ";"      (the last ";" may be omitted)
    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" ["-"] int)*
    atom   := number | "x" int | func "(" expr ")" | "pow(" expr "," int ")" | "(" expr ")"
    func   := sin | cos | exp | tanh | ln

``#`` starts a comment.  Evaluation is vectorized: points may be a single
``(n,)`` array or a batch ``(..., n)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np


class MapSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class MapDomainError(ValueError):
    """Raised for ln of a non-positive value or division by zero."""


# AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, Neg, BinOp, Call, Pow]

FUNCTIONS = ("sin", "cos", "exp", "tanh", "ln")


@dataclass(frozen=True)
class MapSpec:
    n: int
    exprs: tuple[Expr, ...]
    name: str = "map"

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def source(self) -> str:
        return to_source(self)


# tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),;=])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise MapSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, text, line, pos - line_start + 1))
        for i, ch in enumerate(text):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0
        self.n = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> MapSyntaxError:
        tok = tok or self.tok
        shown = repr(tok.text) if tok.kind != "eof" else "end of input"
        return MapSyntaxError(f"{msg} (got {shown})", tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            raise self.error("expected integer")
        self.i += 1
        return int(t.text)

    def parse_map(self, name: str) -> MapSpec:
        t = self.tok
        if t.text != "n":
            raise self.error("expected header 'n='")
        self.i += 1
        self.expect("=")
        n = self.integer()
        if n not in (2, 3):
            raise self.error(f"dimension must be 2 or 3, not {n}", t)
        self.expect(";")
        self.n = n
        exprs: dict[int, Expr] = {}
        while self.tok.kind != "eof":
            t = self.tok
            m = re.fullmatch(r"f(\d+)", t.text) if t.kind == "name" else None
            if not m:
                raise self.error("expected component 'f<i>'")
            idx = int(m.group(1))
            if not 1 <= idx <= n:
                raise self.error(f"component index {idx} outside 1..{n}", t)
            if idx in exprs:
                raise self.error(f"component f{idx} defined twice", t)
            self.i += 1
            self.expect("=")
            exprs[idx] = self.expr()
            if self.tok.kind != "eof":
                self.expect(";")
        missing = [i for i in range(1, n + 1) if i not in exprs]
        if missing:
            raise self.error(f"missing component(s) {', '.join(f'f{i}' for i in missing)}")
        return MapSpec(n, tuple(exprs[i] for i in range(1, n + 1)), name)

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.tok.text == "-":
            self.i += 1
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        while self.tok.text == "^":
            self.i += 1
            sign = 1
            if self.tok.text == "-":
                sign = -1
                self.i += 1
            node = Pow(node, sign * self.integer())
        return node

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.text == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            m = re.fullmatch(r"x(\d+)", t.text)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.n:
                    raise self.error(f"variable index {idx} exceeds n={self.n}", t)
                self.i += 1
                return Var(idx)
            if t.text == "pow":
                self.i += 1
                self.expect("(")
                base = self.expr()
                self.expect(",")
                sign = 1
                if self.tok.text == "-":
                    sign = -1
                    self.i += 1
                k = self.integer()
                self.expect(")")
                return Pow(base, sign * k)
            if t.text in FUNCTIONS:
                self.i += 1
                self.expect("(")
                arg = self.expr()
                if self.tok.text == ",":
                    raise self.error(f"{t.text} takes one argument")
                self.expect(")")
                return Call(t.text, arg)
            raise self.error(f"unknown function or variable {t.text!r}")
        raise self.error("expected expression")


def parse_map(source: str, name: str = "map") -> MapSpec:
    return _Parser(source).parse_map(name)


# printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_expr_source(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.fn}({to_expr_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_expr_source(e.arg)
        return "-" + (f"({inner})" if _prec(e.arg) < 3 else inner)
    if isinstance(e, Pow):
        inner = to_expr_source(e.base)
        if _prec(e.base) < 4 or isinstance(e.base, Num) and e.base.value < 0:
            inner = f"({inner})"
        return f"{inner}^{e.exponent}"
    p = _PREC[e.op]
    left = to_expr_source(e.left)
    right = to_expr_source(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def to_source(m: MapSpec) -> str:
    lines = [f"n={m.n};"]
    lines += [f"f{i} = {to_expr_source(e)};" for i, e in enumerate(m.exprs, start=1)]
    return "\n".join(lines) + "\n"


# evaluation with dual numbers

class Dual:
    """``value + sum_k eps_k * deriv[..., k]`` with all eps_j * eps_k = 0.

    ``value`` has the batch shape; ``deriv`` carries one extra trailing axis
    holding the directional derivatives, so a single pass yields every
    column of the Jacobian.
    """

    __slots__ = ("value", "deriv")

    def __init__(self, value, deriv):
        self.value = value
        self.deriv = deriv

    def __add__(self, o: "Dual") -> "Dual":
        return Dual(self.value + o.value, self.deriv + o.deriv)

    def __sub__(self, o: "Dual") -> "Dual":
        return Dual(self.value - o.value, self.deriv - o.deriv)

    def __mul__(self, o: "Dual") -> "Dual":
        return Dual(self.value * o.value,
                    self.deriv * o.value[..., None] + self.value[..., None] * o.deriv)

    def __truediv__(self, o: "Dual") -> "Dual":
        q = self.value / o.value
        return Dual(q, (self.deriv - q[..., None] * o.deriv) / o.value[..., None])

    def __neg__(self) -> "Dual":
        return Dual(-self.value, -self.deriv)

    def scaled(self, value, factor) -> "Dual":
        """Chain rule for a scalar function with derivative ``factor``."""
        return Dual(value, factor[..., None] * self.deriv)


def _apply(fn: str, a: Dual) -> Dual:
    v = a.value
    if fn == "sin":
        return a.scaled(np.sin(v), np.cos(v))
    if fn == "cos":
        return a.scaled(np.cos(v), -np.sin(v))
    if fn == "exp":
        e = np.exp(v)
        return a.scaled(e, e)
    if fn == "tanh":
        t = np.tanh(v)
        return a.scaled(t, 1.0 - t * t)
    if fn == "ln":
        return a.scaled(np.log(v), 1.0 / v)
    raise ValueError(f"unknown function {fn}")


def _ipow(a: Dual, k: int) -> Dual:
    if k == 0:
        return Dual(np.ones_like(a.value), np.zeros_like(a.deriv))
    return a.scaled(a.value ** k, k * a.value ** (k - 1))


def _eval_dual(e: Expr, xs: list[Dual], shape, where) -> Dual:
    if isinstance(e, Num):
        return Dual(np.full(shape, e.value), np.zeros(shape + xs[0].deriv.shape[-1:]))
    if isinstance(e, Var):
        return xs[e.index - 1]
    if isinstance(e, Neg):
        return -_eval_dual(e.arg, xs, shape, where)
    if isinstance(e, Call):
        a = _eval_dual(e.arg, xs, shape, where)
        if e.fn == "ln":
            bad = ~(a.value > 0)
            if np.any(bad):
                raise MapDomainError(
                    f"ln of non-positive value in '{to_expr_source(e)}' at {where(bad)}")
        return _apply(e.fn, a)
    if isinstance(e, Pow):
        a = _eval_dual(e.base, xs, shape, where)
        if e.exponent < 0:
            bad = a.value == 0
            if np.any(bad):
                raise MapDomainError(
                    f"division by zero in '{to_expr_source(e)}' at {where(bad)}")
        return _ipow(a, e.exponent)
    left = _eval_dual(e.left, xs, shape, where)
    right = _eval_dual(e.right, xs, shape, where)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    bad = right.value == 0
    if np.any(bad):
        raise MapDomainError(f"division by zero in '{to_expr_source(e)}' at {where(bad)}")
    return left / right


def _prepare(m: MapSpec, x):
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != m.n:
        raise ValueError(f"expected points with {m.n} coordinates, got shape {pts.shape}")
    shape = pts.shape[:-1]

    def where(mask):
        mask = np.broadcast_to(mask, shape)
        if mask.ndim == 0:
            return tuple(float(c) for c in pts)
        first = tuple(int(i[0]) for i in np.nonzero(mask))
        return tuple(float(c) for c in pts[first])

    return pts, shape, where


def _run(m: MapSpec, pts, shape, where, with_derivs: bool):
    """Evaluate every component; seed one derivative slot per coordinate if asked."""
    k = m.n if with_derivs else 0
    eye = np.eye(m.n)[:, :k]
    xs = [Dual(pts[..., j], np.broadcast_to(eye[j], shape + (k,))) for j in range(m.n)]
    with np.errstate(all="ignore"):
        return [_eval_dual(e, xs, shape, where) for e in m.exprs]


def evaluate(m: MapSpec, x) -> np.ndarray:
    """f(x) componentwise; the last axis of ``x`` holds the coordinates."""
    pts, shape, where = _prepare(m, x)
    vals = _run(m, pts, shape, where, False)
    return np.stack([np.broadcast_to(v.value, shape) for v in vals], axis=-1)


def jacobian(m: MapSpec, x) -> np.ndarray:
    """Jacobian rows df_i/dx from a single multi-directional dual pass."""
    return evaluate_with_jacobian(m, x)[1]


def evaluate_with_jacobian(m: MapSpec, x) -> tuple[np.ndarray, np.ndarray]:
    pts, shape, where = _prepare(m, x)
    vals = _run(m, pts, shape, where, True)
    value = np.stack([np.broadcast_to(v.value, shape) for v in vals], axis=-1)
    jac = np.stack([np.broadcast_to(v.deriv, shape + (m.n,)) for v in vals], axis=-2)
    return value, jac


def height_gradient(m: MapSpec, v, x) -> np.ndarray:
    """Gradient of x -> <f(x), v>, differentiated directly on the scalar."""
    v = np.asarray(v, dtype=float)
    pts, shape, where = _prepare(m, x)
    vals = _run(m, pts, shape, where, True)
    g = Dual(np.zeros(shape), np.zeros(shape + (m.n,)))
    for vi, d in zip(v, vals):
        g = g + Dual(np.full(shape, vi), np.zeros(shape + (m.n,))) * d
    return np.broadcast_to(g.deriv, shape + (m.n,)).copy()


# built-in corpus

CORPUS_SOURCES: dict[str, str] = {
    "identity": "n=2; f1 = x1; f2 = x2;",
    "linear_2i": "n=2; f1 = 2*x1; f2 = 2*x2;",
    "exp_polar": "n=2; f1 = exp(x1)*cos(x2); f2 = exp(x1)*sin(x2);",
    "slab": "n=2; f1 = x1; f2 = tanh(x2);",
    "rotation": (
        f"n=2; f1 = {math.cos(0.5)!r}*x1 - {math.sin(0.5)!r}*x2; "
        f"f2 = {math.sin(0.5)!r}*x1 + {math.cos(0.5)!r}*x2;"
    ),
    "shear": "n=2; f1 = x1 + 2*x2; f2 = x2;",
    "identity3": "n=3; f1 = x1; f2 = x2; f3 = x3;",
    "exp_cylinder": "n=3; f1 = exp(x1)*cos(x2); f2 = exp(x1)*sin(x2); f3 = x3;",
}


def corpus() -> dict[str, MapSpec]:
    return {name: parse_map(src, name) for name, src in CORPUS_SOURCES.items()}


def load_map(name_or_source: str) -> MapSpec:
    """A corpus name, or map source text."""
    if name_or_source in CORPUS_SOURCES:
        return parse_map(CORPUS_SOURCES[name_or_source], name_or_source)
    return parse_map(name_or_source)
