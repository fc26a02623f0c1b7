"""Parser and evaluator for closed-form expressions of one nonnegative variable.

Grammar (no implicit multiplication, decimal literals with optional scientific
notation):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' power)?            # right-associative
    atom    := NUMBER | 'x' | 't' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'exp' | 'log' | 'sqrt'

'^' binds tighter than unary minus, which binds tighter than '*' and '/',
so "-x^2" is -(x^2) and "-2*3" is (-2)*3.  Both "x" and "t" denote the
single free variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExpressionError",
    "ParseError",
    "UnknownIdentifierError",
    "DomainError",
    "parse",
    "evaluate",
    "to_source",
]

_FUNCTIONS = ("exp", "log", "sqrt")
_VARIABLES = ("x", "t")


class ExpressionError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ParseError(ExpressionError):
    """Syntax error, carrying the byte offset and the expected-token set."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    """Identifier other than the variable or a supported function."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(
            f"unknown identifier {name!r}", offset,
            expected=_VARIABLES + _FUNCTIONS,
        )


class DomainError(ExpressionError):
    """Evaluation hit a point outside a sub-expression's domain."""

    def __init__(self, message: str, source: str, point: float):
        self.source = source
        self.point = point
        super().__init__(f"{message} in {source!r} at point {point!r}")


@dataclass(frozen=True)
class Expr:
    """Immutable expression node; offsets are informational only."""

    offset: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # one of exp log sqrt
    arg: Expr


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ParseError(
                f"unexpected token {value!r}" if kind != "end" else "unexpected end of input",
                offset, expected=(repr(op),),
            )
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", offset,
                             expected=("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, value, offset = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term(), offset=offset)
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, value, offset = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.unary(), offset=offset)
            else:
                return node

    def unary(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary(), offset=offset)
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        kind, value, offset = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", node, self.power(), offset=offset)
        return node

    def atom(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "number":
            self.advance()
            return Num(float(value), offset=offset)
        if kind == "ident":
            self.advance()
            if value in _VARIABLES:
                return Var(offset=offset)
            if value in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg, offset=offset)
            raise UnknownIdentifierError(value, offset)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(
            f"unexpected token {value!r}" if kind != "end" else "unexpected end of input",
            offset, expected=("number", "variable", "function", "'('", "'-'"),
        )


def parse(text: str) -> Expr:
    """Parse an expression string into an immutable AST."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0,
                         expected=("number", "variable", "function", "'('", "'-'"))
    return _Parser(text).parse()


def _check(ok, node: Expr, point, message: str) -> None:
    bad = ~np.asarray(ok, dtype=bool)
    if not np.any(bad):
        return
    p = np.asarray(point, dtype=float)
    offending = float(p.reshape(-1)[0] if p.ndim == 0 else p[np.argmax(bad)])
    raise DomainError(message, to_source(node), offending)


def evaluate(node: Expr, point):
    """Evaluate ``node`` at ``point`` (float or ndarray).

    Division by zero, log of a non-positive value, sqrt of a negative value
    and 0 raised to a negative power raise DomainError instead of producing
    infinities or NaNs.
    """
    x = np.asarray(point, dtype=float)
    with np.errstate(all="ignore"):
        result = _eval(node, x)
    if np.ndim(point) == 0:
        return float(result)
    return result


def _eval(node: Expr, x: np.ndarray):
    if isinstance(node, Num):
        return np.full_like(x, node.value) if x.ndim else node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        arg = _eval(node.arg, x)
        if node.func == "exp":
            return np.exp(arg)
        if node.func == "log":
            _check(np.asarray(arg) > 0, node, x, "log of non-positive value")
            return np.log(arg)
        _check(np.asarray(arg) >= 0, node, x, "sqrt of negative value")
        return np.sqrt(arg)
    assert isinstance(node, BinOp)
    left = _eval(node.left, x)
    right = _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        _check(np.asarray(right) != 0, node, x, "division by zero")
        return left / right
    la, ra = np.asarray(left), np.asarray(right)
    _check(~((la == 0) & (ra < 0)), node, x, "zero raised to negative power")
    _check(~((la < 0) & (ra != np.floor(ra))), node, x,
           "negative base with non-integer exponent")
    return np.power(left, right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def _wrap(text: str, need_parens: bool) -> str:
    return f"({text})" if need_parens else text


def to_source(node: Expr) -> str:
    """Render the AST back to a string that reparses to an equal AST."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return "-" + _wrap(inner, _prec(node.operand) < _PREC["neg"])
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    assert isinstance(node, BinOp)
    p = _PREC[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    if node.op == "^":
        # right-associative; unary minus on either side needs parentheses
        return (_wrap(left, _prec(node.left) <= p) + "^"
                + _wrap(right, _prec(node.right) < p))
    return (_wrap(left, _prec(node.left) < p) + node.op
            + _wrap(right, _prec(node.right) <= p))


