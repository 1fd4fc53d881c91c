"""Arithmetic expressions in ``x`` and ``t`` for kernels and right-hand sides.

Grammar (whitespace ignored, ASCII only)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | "x" | "t" | "pi" | NAME "(" expr ("," expr)* ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)`` and ``2^-1`` is ``0.5``.

Evaluation is vectorized over numpy arrays. Domain errors (``log(-1)``,
``sqrt(-1)``, ``(-8)^(1/3)``) yield NaN rather than raising; callers that
need a status use :func:`evaluate_checked`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ArityError, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "ExprAst",
    "Num",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "Expression",
    "parse",
    "evaluate",
    "evaluate_checked",
    "to_source",
    "FUNCTIONS",
]

MAX_NESTING = 100
MAX_OPERATORS = 400


def _log(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(all="ignore"):
        return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)


FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "tan": (1, np.tan),
    "exp": (1, np.exp),
    "log": (1, _log),
    "sqrt": (1, np.sqrt),
    "sinh": (1, np.sinh),
    "cosh": (1, np.cosh),
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

VARIABLES = ("x", "t")
CONSTANTS = {"pi": math.pi}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


# -- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["ExprAst", ...]


ExprAst = Union[Num, Const, Var, Unary, Binary, Call]


# -- tokenizer --------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int  # 1-based column


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ord(ch) > 127:
            raise ExprSyntaxError(f"non-ASCII character {ch!r}", pos + 1)
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {ch!r}", pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(_Token("end", "", n + 1))
    return tokens


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0
        self.depth = 0
        self.operators = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.tok
        if tok.kind == "op" and tok.text == text:
            return self.advance()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.offset)

    def enter(self, offset: int) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ExprSyntaxError("expression nested too deeply", offset)

    def leave(self) -> None:
        self.depth -= 1

    def count_operator(self, offset: int) -> None:
        self.operators += 1
        if self.operators > MAX_OPERATORS:
            raise ExprSyntaxError("expression too long", offset)

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            self.count_operator(op.offset)
            node = Binary(op.text, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            self.count_operator(op.offset)
            node = Binary(op.text, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            self.enter(op.offset)
            node = Unary("-", self.unary())
            self.leave()
            return node
        return self.power()

    def power(self) -> ExprAst:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            self.enter(op.offset)
            self.count_operator(op.offset)
            node = Binary("^", base, self.unary())
            self.leave()
            return node
        return base

    def primary(self) -> ExprAst:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            self.enter(tok.offset)
            node = self.expr()
            self.expect(")")
            self.leave()
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.offset)

    def name(self, tok: _Token) -> ExprAst:
        name = tok.text
        is_call = self.tok.kind == "op" and self.tok.text == "("
        if not is_call:
            if name in VARIABLES:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                raise ExprSyntaxError(f"function {name!r} needs an argument list", tok.offset)
            raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.offset)
        if name not in FUNCTIONS:
            if name in VARIABLES or name in CONSTANTS:
                raise ExprSyntaxError(f"{name!r} is not a function", tok.offset)
            raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.offset)
        open_paren = self.advance()
        self.enter(open_paren.offset)
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        self.leave()
        arity = FUNCTIONS[name][0]
        if len(args) != arity:
            raise ArityError(
                f"function {name!r} takes {arity} argument(s), got {len(args)}", tok.offset
            )
        return Call(name, tuple(args))


def parse(source: str | bytes) -> ExprAst:
    """Parse ``source`` into an AST.

    Raises :class:`ExprSyntaxError`, :class:`UnknownIdentifierError` or
    :class:`ArityError`; every error carries a 1-based ``offset``.
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("ascii")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("non-ASCII byte", exc.start + 1) from None
    if not source.strip():
        raise ExprSyntaxError("empty expression", 1)
    return _Parser(source).parse()


# -- evaluation -------------------------------------------------------------


def _compile(node: ExprAst) -> Callable:
    if isinstance(node, Num):
        v = node.value
        return lambda x, t: v
    if isinstance(node, Const):
        v = CONSTANTS[node.name]
        return lambda x, t: v
    if isinstance(node, Var):
        if node.name == "x":
            return lambda x, t: x
        return lambda x, t: t
    if isinstance(node, Unary):
        f = _compile(node.operand)
        return lambda x, t: np.negative(f(x, t))
    if isinstance(node, Binary):
        op = _BINARY[node.op]
        lhs, rhs = _compile(node.left), _compile(node.right)
        return lambda x, t: op(lhs(x, t), rhs(x, t))
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][1]
        args = [_compile(a) for a in node.args]
        if len(args) == 1:
            (a0,) = args
            return lambda x, t: fn(a0(x, t))
        a0, a1 = args
        return lambda x, t: fn(a0(x, t), a1(x, t))
    raise TypeError(f"not an expression node: {node!r}")


class Expression:
    """A parsed expression compiled to a vectorized callable ``f(x, t)``."""

    def __init__(self, source: str | ExprAst):
        if isinstance(source, str):
            self.source = source
            self.ast = parse(source)
        else:
            self.ast = source
            self.source = to_source(source)
        self._fn = _compile(self.ast)

    def __call__(self, x, t=0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = self._fn(x, t)
        return np.array(np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, t).shape))

    def uses(self, name: str) -> bool:
        return _uses(self.ast, name)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


def _uses(node: ExprAst, name: str) -> bool:
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, Unary):
        return _uses(node.operand, name)
    if isinstance(node, Binary):
        return _uses(node.left, name) or _uses(node.right, name)
    if isinstance(node, Call):
        return any(_uses(a, name) for a in node.args)
    return False


def evaluate(ast: ExprAst, x: float, t: float = 0.0) -> float:
    """Evaluate at a single point. Domain errors give NaN."""
    with np.errstate(all="ignore"):
        return float(_compile(ast)(np.float64(x), np.float64(t)))


def evaluate_checked(ast: ExprAst, x: float, t: float = 0.0) -> tuple[float, bool]:
    """Like :func:`evaluate`, also returning ``ok = False`` for a NaN result."""
    value = evaluate(ast, x, t)
    return value, not math.isnan(value)


def to_source(node: ExprAst) -> str:
    """Fully parenthesized source text that re-parses to an equivalent tree."""
    if isinstance(node, Num):
        # literals are non-negative; overflowed ones re-parse from 1e999
        return repr(node.value) if math.isfinite(node.value) else "1e999"
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Unary):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")
