"""A small expression language: parser, printer and jet evaluator.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | ident | ident "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus and is right-associative, so ``-u1^2``
is ``-(u1^2)`` and ``a^b^c`` is ``a^(b^c)``.  There are no named constants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import jet as J
from .errors import DomainError, ExprSyntaxError, UnboundVariableError

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs", "atan")
MAX_JET_ORDER = 6


class Expr:
    """Base class of AST nodes. Nodes are frozen dataclasses."""

    def __str__(self):
        return to_string(self)

    # convenience constructors so gallery code can build ASTs directly
    def __add__(self, other):
        return BinOp("+", self, _lift(other))

    def __radd__(self, other):
        return BinOp("+", _lift(other), self)

    def __sub__(self, other):
        return BinOp("-", self, _lift(other))

    def __rsub__(self, other):
        return BinOp("-", _lift(other), self)

    def __mul__(self, other):
        return BinOp("*", self, _lift(other))

    def __rmul__(self, other):
        return BinOp("*", _lift(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, _lift(other))

    def __pow__(self, other):
        return BinOp("^", self, _lift(other))

    def __neg__(self):
        return Neg(self)


def _lift(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return parse(x)
    return Num(float(x))


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


# parsing ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                self.fail(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def fail(self, message, char_pos):
        raise ExprSyntaxError(message, self.text, len(self.text[:char_pos].encode("utf-8")))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            self.fail(f"expected {value!r}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression", 0)
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            self.fail(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    self.fail(f"unknown function {text!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                self.fail(f"function {text!r} needs an argument", pos)
            return Var(text)
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input", pos)
        self.fail(f"unexpected token {text!r}", pos)


def parse(text: str) -> Expr:
    """Parse ``text`` into an AST; raises :class:`ExprSyntaxError`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


# printing --------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 3
    return 5


def _wrap(e, min_prec):
    s = to_string(e)
    return f"({s})" if _prec(e) < min_prec else s


def _num(v):
    if math.isinf(v) or math.isnan(v):
        raise ValueError(f"cannot print non-finite literal {v}")
    return repr(float(v))


def to_string(e: Expr) -> str:
    if isinstance(e, Num):
        return _num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, 3)
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        if e.op == "^":
            return f"{_wrap(e.left, 5)}^{_wrap(e.right, 3)}"
        sep = f" {e.op} " if p == 1 else e.op
        return f"{_wrap(e.left, p)}{sep}{_wrap(e.right, p + 1)}"
    raise TypeError(f"not an expression node: {e!r}")


def free_vars(e: Expr) -> tuple[str, ...]:
    names = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            names.add(node.name)
        elif isinstance(node, Neg | Call):
            stack.append(node.arg)
        elif isinstance(node, BinOp):
            stack.extend((node.left, node.right))
    return tuple(sorted(names))


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    return e


# evaluation ------------------------------------------------------------------

_MATH = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "exp": math.exp, "atan": math.atan, "abs": abs,
}


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Plain recursive float evaluation."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, bindings)
    if isinstance(e, Call):
        x = evaluate(e.arg, bindings)
        if e.func == "log":
            if x <= 0:
                raise DomainError("log of a non-positive value", str(e))
            return math.log(x)
        if e.func == "sqrt":
            if x < 0:
                raise DomainError("sqrt of a negative value", str(e))
            return math.sqrt(x)
        try:
            return _MATH[e.func](x)
        except (OverflowError, ValueError) as exc:
            raise DomainError(str(exc), str(e)) from None
    a = evaluate(e.left, bindings)
    b = evaluate(e.right, bindings)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0:
            raise DomainError("division by zero", str(e))
        return a / b
    try:
        r = a**b
    except (OverflowError, ZeroDivisionError) as exc:
        raise DomainError(str(exc), str(e)) from None
    if isinstance(r, complex):
        raise DomainError("non-integer power of a negative value", str(e))
    return float(r)


@dataclass(frozen=True)
class EvalContext:
    """Bindings for every free variable plus the jet layout.

    ``jet_vars`` are the variables the jet differentiates in; the remaining
    bindings are constants.
    """

    bindings: Mapping[str, float]
    jet_vars: Sequence[str] = ()
    jet_order: int = 2
    max_order: int = MAX_JET_ORDER
    _space: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.jet_order <= self.max_order:
            raise ValueError(f"jet order must be in [0, {self.max_order}], got {self.jet_order}")
        missing = [v for v in self.jet_vars if v not in self.bindings]
        if missing:
            raise UnboundVariableError(missing[0])
        object.__setattr__(self, "_space", J.jet_space(len(self.jet_vars), self.jet_order))

    @property
    def space(self):
        return self._space


_JET_FUNCS = {
    "sin": J.sin, "cos": J.cos, "tan": J.tan,
    "sinh": J.sinh, "cosh": J.cosh, "tanh": J.tanh,
    "exp": J.exp, "log": J.log, "sqrt": J.sqrt, "abs": J.fabs, "atan": J.atan,
}


def eval_jet(e: Expr, ctx: EvalContext) -> J.Jet:
    """Exact partial derivatives of ``e`` up to ``ctx.jet_order``."""
    seeds = {}
    for k, name in enumerate(ctx.jet_vars):
        seeds[name] = J.Jet.variable(float(ctx.bindings[name]), k, ctx.space)
    with np.errstate(all="raise"):
        try:
            return _eval_jet(e, ctx, seeds, {})
        except FloatingPointError as exc:
            raise DomainError(f"floating point error: {exc}", str(e)) from None


def _eval_jet(e, ctx, seeds, memo):
    if isinstance(e, Num):
        return J.Jet.constant(e.value, ctx.space)
    if isinstance(e, Var):
        if e.name in seeds:
            return seeds[e.name]
        try:
            return J.Jet.constant(float(ctx.bindings[e.name]), ctx.space)
        except KeyError:
            raise UnboundVariableError(e.name) from None
    key = id(e)
    if key in memo:
        return memo[key][1]
    try:
        if isinstance(e, Neg):
            out = -_eval_jet(e.arg, ctx, seeds, memo)
        elif isinstance(e, Call):
            out = _JET_FUNCS[e.func](_eval_jet(e.arg, ctx, seeds, memo))
        else:
            a = _eval_jet(e.left, ctx, seeds, memo)
            b = _eval_jet(e.right, ctx, seeds, memo)
            if e.op == "+":
                out = a + b
            elif e.op == "-":
                out = a - b
            elif e.op == "*":
                out = a * b
            elif e.op == "/":
                out = a / b
            else:
                out = J.power(a, b)
    except DomainError as exc:
        if exc.subexpr is None:
            raise DomainError(str(exc), str(e)) from None
        raise
    memo[key] = (e, out)
    return out
