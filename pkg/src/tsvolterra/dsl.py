"""Scalar expressions in ``t``, ``s``, ``x`` for kernels, forcing terms and brackets.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = primary , [ "^" , unary ] ;          (* right-associative *)
    primary = number | variable | call | "(" , expr , ")" ;
    call    = function , "(" , expr , { "," , expr } , ")" ;
    variable = "t" | "s" | "x" ;
    function = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" | "min" | "max" ;

``^`` binds tighter than unary minus, so ``-2^2`` is ``-4`` and ``2^-1`` is
``0.5``.  Evaluation is vectorized over numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, EvaluationOverflow, ExprSyntaxError, UnknownIdentifier
from .timescale import Grid

VARIABLES = ("t", "s", "x")
FUNCTIONS = {
    "sin": (1, 1),
    "cos": (1, 1),
    "exp": (1, 1),
    "log": (1, 1),
    "sqrt": (1, 1),
    "abs": (1, 1),
    "min": (2, None),
    "max": (2, None),
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]
EXPR_TYPES = (Num, Var, Neg, BinOp, Call)


# tokenizer

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", an operator character, or "end"
    text: str
    offset: int  # byte offset into the UTF-8 encoding


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    byte = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}",
                byte,
                {"number", "identifier", "operator", "'('", "')'"},
            )
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(m.group() if kind == "op" else kind, m.group(), byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    toks.append(_Tok("end", "", byte))
    return toks


_PRIMARY_START = {"number", "identifier", "'('", "'-'"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message, expected):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"{message}, found {found}", tok.offset, expected)

    def take(self, kind, expected=None):
        if self.tok.kind != kind:
            self.fail(f"expected {kind!r}", expected or {repr(kind)})
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected token", {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.take(self.tok.kind).kind
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.take(self.tok.kind).kind
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.tok.kind == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.kind == "^":
            self.i += 1
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError("numeric literal out of range", tok.offset)
            return Num(value)
        if tok.kind == "(":
            self.i += 1
            e = self.expr()
            self.take(")", {"')'", "operator"})
            return e
        if tok.kind == "name":
            self.i += 1
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                return self.call(tok)
            raise UnknownIdentifier(
                f"unknown identifier {tok.text!r}",
                tok.offset,
                set(VARIABLES) | set(FUNCTIONS),
            )
        self.fail("expected an operand", _PRIMARY_START)

    def call(self, name_tok):
        self.take("(", {"'('"})
        args = [self.expr()]
        while self.tok.kind == ",":
            self.i += 1
            args.append(self.expr())
        self.take(")", {"','", "')'"})
        lo, hi = FUNCTIONS[name_tok.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = str(lo) if hi == lo else f"at least {lo}"
            raise ExprSyntaxError(
                f"{name_tok.text}() takes {want} argument(s), got {len(args)}",
                name_tok.offset,
            )
        return Call(name_tok.text, tuple(args))


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with byte offset and expected tokens) or
    its subclass :class:`UnknownIdentifier`.
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a str")
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Fully parenthesized text that parses back to an equivalent tree."""
    if isinstance(e, Num):
        text = repr(e.value)
        return f"({text})" if e.value < 0 or text.startswith("-") else text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


# evaluation

def _finite(val, what):
    if not np.all(np.isfinite(val)):
        raise EvaluationOverflow(f"{what} produced a non-finite value")
    return val


def _ev(e, env):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_ev(e.operand, env)
    if isinstance(e, BinOp):
        a = _ev(e.left, env)
        b = _ev(e.right, env)
        with np.errstate(all="ignore"):
            if e.op == "+":
                return _finite(a + b, "addition")
            if e.op == "-":
                return _finite(a - b, "subtraction")
            if e.op == "*":
                return _finite(a * b, "multiplication")
            if e.op == "/":
                if np.any(b == 0):
                    raise DomainError("division by zero")
                return _finite(a / b, "division")
            if np.any((a == 0) & (b < 0)):
                raise DomainError("zero raised to a negative power")
            if np.any((a < 0) & (b != np.round(b))):
                raise DomainError("negative base with non-integer exponent")
            return _finite(np.power(a, b), "power")
    if isinstance(e, Call):
        args = [_ev(a, env) for a in e.args]
        name = e.name
        with np.errstate(all="ignore"):
            if name == "log":
                if np.any(args[0] <= 0):
                    raise DomainError("log of a nonpositive number")
                return np.log(args[0])
            if name == "sqrt":
                if np.any(args[0] < 0):
                    raise DomainError("sqrt of a negative number")
                return np.sqrt(args[0])
            if name == "exp":
                return _finite(np.exp(args[0]), "exp")
            if name == "sin":
                return np.sin(args[0])
            if name == "cos":
                return np.cos(args[0])
            if name == "abs":
                return np.abs(args[0])
            if name == "min":
                return np.minimum.reduce(np.broadcast_arrays(*args))
            if name == "max":
                return np.maximum.reduce(np.broadcast_arrays(*args))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_array(e: Expr, t=0.0, s=0.0, x=0.0) -> np.ndarray:
    """Evaluate with numpy broadcasting over ``t``, ``s`` and ``x``."""
    t, s, x = (np.asarray(v, dtype=float) for v in (t, s, x))
    shape = np.broadcast_shapes(t.shape, s.shape, x.shape)
    out = _ev(e, {"t": t, "s": s, "x": x})
    return np.broadcast_to(np.asarray(out, dtype=float), shape)


def evaluate(e: Expr, t: float = 0.0, s: float = 0.0, x: float = 0.0) -> float:
    return float(evaluate_array(e, t, s, x))


def variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        return frozenset().union(*(variables(a) for a in e.args))
    return frozenset()


# kernel diagnostics

@dataclass(frozen=True)
class LipschitzEstimate:
    """Sampled Lipschitz constant of ``k`` in ``x``.

    This is a lower estimate of the true constant: it is the largest
    difference quotient seen on the sample set.
    """

    L: float
    sample_count: int
    x_range: tuple


@dataclass(frozen=True)
class MonotoneCheck:
    monotone: bool
    witness: tuple | None = None  # (t, s, x1, x2) with k(t,s,x2) < k(t,s,x1)

    def __bool__(self):
        return self.monotone


def _node_pairs(grid: Grid):
    rows, cols = np.tril_indices(len(grid.nodes))
    return grid.nodes[rows], grid.nodes[cols]


def _x_samples(x_lo, x_hi, n_x):
    if not x_lo <= x_hi:
        raise ValueError(f"need x_lo <= x_hi, got {x_lo!r} > {x_hi!r}")
    if n_x < 2:
        raise ValueError("n_x must be at least 2")
    return np.linspace(x_lo, x_hi, n_x)


def estimate_lipschitz(k: Expr, grid: Grid, x_lo: float, x_hi: float, n_x: int = 21) -> LipschitzEstimate:
    """Max of ``|k(t,s,x+d) - k(t,s,x-d)| / (2d)`` over node pairs ``s <= t``
    and ``n_x`` uniform samples of ``x``, with ``d = (x_hi - x_lo) / (10 n_x)``."""
    xs = _x_samples(x_lo, x_hi, n_x)
    delta = (x_hi - x_lo) / (10 * n_x)
    if delta == 0:
        delta = 1e-6 * max(1.0, abs(x_lo))
    tt, ss = _node_pairs(grid)
    best = 0.0
    for xv in xs:
        up = evaluate_array(k, tt, ss, xv + delta)
        dn = evaluate_array(k, tt, ss, xv - delta)
        best = max(best, float(np.max(np.abs(up - dn))) / (2 * delta))
    return LipschitzEstimate(L=best, sample_count=len(tt) * n_x, x_range=(float(x_lo), float(x_hi)))


def check_monotone_in_x(k: Expr, grid: Grid, x_lo: float, x_hi: float, n_x: int = 21) -> MonotoneCheck:
    """Sampled check that ``k`` is nondecreasing in its third argument."""
    xs = _x_samples(x_lo, x_hi, n_x)
    tt, ss = _node_pairs(grid)
    prev = evaluate_array(k, tt, ss, xs[0])
    for x1, x2 in zip(xs, xs[1:]):
        cur = evaluate_array(k, tt, ss, x2)
        bad = cur < prev - 1e-12
        if np.any(bad):
            j = int(np.argmax(bad))
            return MonotoneCheck(False, (float(tt[j]), float(ss[j]), float(x1), float(x2)))
        prev = cur
    return MonotoneCheck(True)
