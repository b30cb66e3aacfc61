"""A small expression language for radial densities.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' number)?
    atom   := number | 'r1' | 'r2' | 'xi' | '(' expr ')' | 'omsq' '(' expr ')'

Variables are moduli: ``r1 = |z1|``, ``r2 = |z2|``, ``xi = |z1|^k / |z2|``;
``omsq(v) = 1 - v^2``.  Literals and exponents are non-negative.  An
expression is accepted only if interval arithmetic over the box
``[0, 1]^3`` proves it non-negative; otherwise validation fails with a
witness box.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .kernels import HartogsPoint

VARIABLES = ("r1", "r2", "xi")


class DensitySyntaxError(ValueError):
    """Malformed source; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class DensityValidationError(ValueError):
    """The interval check could not prove non-negativity on ``witness``.

    ``witness`` maps each variable to a ``(lo, hi)`` range.
    """

    def __init__(self, message: str, witness: dict):
        box = ", ".join(f"{v} in [{lo:.6g}, {hi:.6g}]" for v, (lo, hi) in sorted(witness.items()))
        super().__init__(f"{message}; witness box: {box}")
        self.witness = witness


# AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class OmSq:
    arg: "Expr"


Expr = Union[Num, Var, BinOp, Pow, OmSq]


# Tokenizer and parser ----------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            raise DensitySyntaxError(f"unexpected character {src[pos]!r}", _byte(src, pos))
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


def _byte(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok):
        raise DensitySyntaxError(msg, _byte(self.src, tok[2]))

    def expect(self, text):
        tok = self.take()
        if tok[1] != text or tok[0] == "num":
            self.fail(f"expected {text!r}, found {tok[1] or 'end of input'!r}", tok)

    def number(self):
        tok = self.take()
        if tok[0] != "num":
            self.fail(f"expected a number, found {tok[1] or 'end of input'!r}", tok)
        value = float(tok[1])
        if not math.isfinite(value):
            self.fail("number is not finite", tok)
        return value

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self):
        node = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            node = Pow(node, self.number())
        return node

    def atom(self):
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            return Num(self.number())
        if kind == "name":
            self.take()
            if text in VARIABLES:
                return Var(text)
            if text == "omsq":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return OmSq(inner)
            self.fail(f"unknown name {text!r}", tok)
        if kind == "op" and text == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(f"unexpected {text or 'end of input'!r}", tok)


def parse_expr(src: str) -> Expr:
    """Parse ``src`` into an AST without the non-negativity check."""
    p = _Parser(src)
    node = p.expr()
    tok = p.peek()
    if tok[0] != "end":
        p.fail(f"unexpected trailing {tok[1]!r}", tok)
    return node


def parse_density(src: str, validate: bool = True) -> Expr:
    """Parse and (by default) validate a density source string."""
    node = parse_expr(src)
    if validate:
        validate_density(node)
    return node


# Printer -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def to_source(e: Expr) -> str:
    """Source text that parses back to an equal AST."""
    if isinstance(e, Num):
        return _fmt(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, OmSq):
        return f"omsq({to_source(e.arg)})"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if not isinstance(e.base, (Num, Var, OmSq)):
            base = f"({base})"
        return f"{base}^{_fmt(e.exponent)}"
    if isinstance(e, BinOp):
        left, right = to_source(e.left), to_source(e.right)
        additive = lambda n: isinstance(n, BinOp) and n.op in "+-"
        if e.op in "+-":
            if additive(e.right):
                right = f"({right})"
            return f"{left} {e.op} {right}"
        if additive(e.left):
            left = f"({left})"
        if isinstance(e.right, BinOp):
            right = f"({right})"
        return f"{left} * {right}"
    raise TypeError(f"not a density expression: {e!r}")


def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Pow):
        return free_vars(e.base)
    return free_vars(e.arg)


# Interval validation -----------------------------------------------------


def _ipow(lo: float, hi: float, p: float):
    if p == 0:
        return 1.0, 1.0
    if lo < 0 and p != int(p):
        return -math.inf, math.inf  # non-integer power of a possibly negative base
    with np.errstate(over="ignore"):
        cands = [float(np.power(lo, p)), float(np.power(hi, p))]
    if lo < 0 < hi:
        cands.append(0.0)
    return min(cands), max(cands)


def _interval(e: Expr, box: dict):
    if isinstance(e, Num):
        return e.value, e.value
    if isinstance(e, Var):
        return box[e.name]
    if isinstance(e, OmSq):
        lo, hi = _interval(e.arg, box)
        sq = _ipow(lo, hi, 2.0)
        return 1.0 - sq[1], 1.0 - sq[0]
    if isinstance(e, Pow):
        return _ipow(*_interval(e.base, box), e.exponent)
    a, b = _interval(e.left, box), _interval(e.right, box)
    if e.op == "+":
        return a[0] + b[0], a[1] + b[1]
    if e.op == "-":
        return a[0] - b[1], a[1] - b[0]
    prods = [x * y for x in a for y in b if not (math.isinf(x) and y == 0 or math.isinf(y) and x == 0)]
    return (min(prods), max(prods)) if prods else (0.0, 0.0)


def _point(e: Expr, values: dict) -> float:
    with np.errstate(all="ignore"):
        return float(evaluate(e, values))


def validate_density(e: Expr, max_boxes: int = 4096) -> None:
    """Prove ``e >= 0`` on ``[0,1]^3`` by interval branch-and-bound.

    Raises :class:`DensityValidationError` with a witness box when a
    negative (or undefined) value is found or the box budget runs out.
    """
    names = sorted(free_vars(e))
    stack = [{v: (0.0, 1.0) for v in VARIABLES}]
    examined = 0
    while stack:
        box = stack.pop()
        examined += 1
        lo, hi = _interval(e, box)
        if lo >= 0 and math.isfinite(hi):
            continue
        mid = {v: 0.5 * (a + b) for v, (a, b) in box.items()}
        val = _point(e, mid)
        witness = {v: box[v] for v in names}
        if not math.isfinite(val):
            raise DensityValidationError("density is undefined or unbounded", witness)
        if val < 0:
            raise DensityValidationError(f"density is negative ({val:.6g} at the box centre)", witness)
        widest = max(names, key=lambda v: box[v][1] - box[v][0]) if names else None
        if examined >= max_boxes or widest is None or box[widest][1] - box[widest][0] < 2.0 ** -20:
            raise DensityValidationError("could not prove the density non-negative", witness)
        a, b = box[widest]
        m = 0.5 * (a + b)
        stack.append({**box, widest: (m, b)})
        stack.append({**box, widest: (a, m)})


# Evaluation --------------------------------------------------------------


def evaluate(e: Expr, values: dict):
    """Evaluate with variables bound to floats or numpy arrays."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return values[e.name]
    if isinstance(e, OmSq):
        x = evaluate(e.arg, values)
        return 1.0 - x * x
    if isinstance(e, Pow):
        return np.power(evaluate(e.base, values), e.exponent)
    a, b = evaluate(e.left, values), evaluate(e.right, values)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


def eval_density(e: Expr, z, k: int) -> float:
    """Density value at a point of ``H_k``."""
    z = HartogsPoint.coerce(z)
    r1, r2 = abs(complex(z.z1)), abs(complex(z.z2))
    return float(evaluate(e, {"r1": r1, "r2": r2, "xi": r1 ** k / r2}))


def density_function(e: Expr, k: int) -> Callable:
    """Vectorised ``rho(z1, z2)`` for use as a general density."""

    def rho(z1, z2):
        r1 = np.abs(z1)
        r2 = np.abs(z2)
        shape = np.broadcast_shapes(np.shape(r1), np.shape(r2))
        out = evaluate(e, {"r1": r1, "r2": r2, "xi": r1 ** k / r2})
        return np.broadcast_to(np.asarray(out, dtype=float), shape)

    return rho


def disc_function(e: Expr, variable: str) -> Callable:
    """Vectorised ``h(omega)`` with ``variable`` bound to ``|omega|``.

    Used for product factors: the ``xi`` factor and the ``r2`` factor.
    """
    extra = free_vars(e) - {variable}
    if extra:
        raise ValueError(f"a factor in {variable!r} may not use {sorted(extra)}")

    def h(omega):
        r = np.abs(omega)
        out = evaluate(e, {variable: r})
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(r))

    return h
