"""Parser, AST and evaluator for the scalar expression mini-language.

Every other module consumes these ASTs: graph components f^s(x1..xm),
potentials F(x1..xm), Dirichlet boundary data.  The grammar is fixed:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' intlit)?
    base   := number | 'pi' | 'e' | var | func '(' expr ')' | '(' expr ')' | '-' base
    var    := 'x' intlit                          (x1 .. xm, 1-based)
    func   in {sin, cos, exp, log, sqrt, sinh, cosh, tanh, asinh, atanh}

Only integer literal exponents are accepted after '^'; fractional powers
must be written with sqrt.  Note that unary minus binds at the 'base'
level, so "-x1^2" parses as (-x1)^2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "asinh", "atanh")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Syntax or name error, carrying the byte offset into the source text."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(ValueError):
    """An elementary function was evaluated outside its domain.

    ``span`` locates the offending subexpression in the original source.
    """

    def __init__(self, message: str, span: tuple[int, int] = (0, 0)):
        super().__init__(f"{message} (subexpression at offsets {span[0]}..{span[1]})")
        self.span = span


# ---------------------------------------------------------------------------
# AST nodes.  Spans are source byte ranges and do not take part in equality,
# so pretty-printed round trips compare structurally identical.

@dataclass(frozen=True)
class Expr:
    span: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Const(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Expr):
    index: int = 1  # 1-based


@dataclass(frozen=True)
class Unary(Expr):
    op: str = "neg"  # 'neg' or a function tag
    child: Expr = None


@dataclass(frozen=True)
class BinOp(Expr):
    op: str = "+"
    lhs: Expr = None
    rhs: Expr = None


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr = None
    exponent: int = 1


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'ident' | 'op' | 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        mo = _TOKEN_RE.match(text, pos)
        if mo is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        for kind in ("num", "ident", "op"):
            if mo.group(kind) is not None:
                tokens.append(_Token(kind, mo.group(kind), mo.start(kind)))
                break
        pos = mo.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.take()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}", tok.pos)
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            node = BinOp(span=(node.span[0], rhs.span[1]), op=op, lhs=node, rhs=rhs)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            rhs = self.factor()
            node = BinOp(span=(node.span[0], rhs.span[1]), op=op, lhs=node, rhs=rhs)
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            k, end = self.intlit(signed=True)
            node = Pow(span=(node.span[0], end), base=node, exponent=k)
        return node

    def intlit(self, signed: bool) -> tuple[int, int]:
        sign = 1
        tok = self.peek()
        if signed and tok.kind == "op" and tok.text == "-":
            self.take()
            sign = -1
            tok = self.peek()
        if tok.kind != "num":
            raise ParseError("expected integer literal", tok.pos)
        self.take()
        if any(c in tok.text for c in ".eE"):
            raise ParseError("integer exponent required (use sqrt for fractional powers)", tok.pos)
        return sign * int(tok.text), tok.pos + len(tok.text)

    def base(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Const(span=(tok.pos, tok.pos + len(tok.text)), value=float(tok.text))
        if tok.kind == "ident":
            name = tok.text
            span = (tok.pos, tok.pos + len(name))
            if name in CONSTANTS:
                return Const(span=span, value=CONSTANTS[name])
            if name in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                close = self.expect_op(")")
                return Unary(span=(tok.pos, close.pos + 1), op=name, child=arg)
            if name[0] == "x" and name[1:].isdigit():
                idx = int(name[1:])
                if not 1 <= idx <= self.dim:
                    raise ParseError(
                        f"variable index out of range: {name} with dimension {self.dim}", tok.pos
                    )
                return Var(span=span, index=idx)
            raise ParseError(f"unknown identifier {name!r}", tok.pos)
        if tok.kind == "op":
            if tok.text == "(":
                node = self.expr()
                close = self.expect_op(")")
                return _with_span(node, (tok.pos, close.pos + 1))
            if tok.text == "-":
                child = self.base()
                return Unary(span=(tok.pos, child.span[1]), op="neg", child=child)
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)


def _with_span(node: Expr, span: tuple[int, int]) -> Expr:
    import dataclasses

    return dataclasses.replace(node, span=span)


def parse(text: str, dim: int) -> Expr:
    """Parse ``text`` into an AST over the variables x1..x<dim>."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# Pretty printer.  Guarantee: parse(pretty(parse(t), ...)) is structurally
# identical to parse(t).

def pretty(node: Expr) -> str:
    if isinstance(node, Const):
        return repr(node.value) if node.value >= 0 else f"(-{repr(-node.value)})"
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = pretty(node.child)
            if isinstance(node.child, (BinOp, Pow)):
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({pretty(node.child)})"
    if isinstance(node, Pow):
        inner = pretty(node.base)
        if not isinstance(node.base, (Var, Const, Unary)) or (
            isinstance(node.base, Unary) and node.base.op == "neg"
        ):
            inner = f"({inner})"
        return f"{inner}^{node.exponent}"
    if isinstance(node, BinOp):
        lhs, rhs = pretty(node.lhs), pretty(node.rhs)
        if node.op in "+-":
            if isinstance(node.rhs, BinOp) and node.rhs.op in "+-":
                rhs = f"({rhs})"
            if isinstance(node.rhs, Unary) and node.rhs.op == "neg":
                rhs = f"({rhs})"
            return f"{lhs}{node.op}{rhs}"
        # '*' or '/'
        if isinstance(node.lhs, BinOp) and node.lhs.op in "+-":
            lhs = f"({lhs})"
        if isinstance(node.rhs, BinOp):
            rhs = f"({rhs})"
        if isinstance(node.rhs, Unary) and node.rhs.op == "neg":
            rhs = f"({rhs})"
        return f"{lhs}{node.op}{rhs}"
    raise TypeError(f"not an Expr: {node!r}")


# ---------------------------------------------------------------------------
# Plain (vectorized) evaluation.  Jets live in spacelike.jets; this is the
# cheap value-only path used for boundary data on lattices.

def eval_values(node: Expr, points: np.ndarray):
    """Evaluate at one point (shape (m,)) or a batch (shape (k, m))."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    out = _eval_rec(node, pts)
    out = np.broadcast_to(out, (pts.shape[0],)).astype(float)
    return float(out[0]) if single else out.copy()


def _eval_rec(node: Expr, pts: np.ndarray):
    if isinstance(node, Const):
        return np.full(pts.shape[0], node.value)
    if isinstance(node, Var):
        return pts[:, node.index - 1]
    if isinstance(node, Unary):
        u = _eval_rec(node.child, pts)
        if node.op == "neg":
            return -u
        if node.op == "log":
            if np.any(u <= 0):
                raise DomainError("log argument out of range", node.span)
            return np.log(u)
        if node.op == "sqrt":
            if np.any(u < 0):
                raise DomainError("sqrt argument out of range", node.span)
            return np.sqrt(u)
        if node.op == "atanh":
            if np.any(np.abs(u) >= 1):
                raise DomainError("atanh argument out of range", node.span)
            return np.arctanh(u)
        fn = {
            "sin": np.sin, "cos": np.cos, "exp": np.exp, "sinh": np.sinh,
            "cosh": np.cosh, "tanh": np.tanh, "asinh": np.arcsinh,
        }[node.op]
        return fn(u)
    if isinstance(node, BinOp):
        a = _eval_rec(node.lhs, pts)
        b = _eval_rec(node.rhs, pts)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(b == 0):
            raise DomainError("division by zero", node.span)
        return a / b
    if isinstance(node, Pow):
        u = _eval_rec(node.base, pts)
        if node.exponent < 0 and np.any(u == 0):
            raise DomainError("zero raised to a negative power", node.span)
        return u ** node.exponent
    raise TypeError(f"not an Expr: {node!r}")
