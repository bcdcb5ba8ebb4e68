"""Scalar expression language for metric components, warp functions and
potentials.

Grammar: real literals, named variables, `+ - * / ^` with standard
precedence (`^` right-associative, unary minus binds tighter than `* /`),
and a fixed set of unary functions. Parsed trees are immutable and evaluate
generically over floats, dual numbers, or second-order jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError
from .numerics import DualNumber, Jet2

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "parse",
    "pretty",
    "eval_expr",
    "eval_dual",
    "eval_jet2",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "cosh", "sinh")


class ExprError(ValueError):
    """Parse or evaluation error carrying a byte offset into the source."""

    def __init__(self, kind: str, position: int, message: str):
        super().__init__(f"{kind} at offset {position}: {message}")
        self.kind = kind
        self.position = position
        self.message = message


class Expr:
    """Base class for expression nodes; supports operator overloading."""

    def __add__(self, other):
        return BinOp("+", self, _wrap(other))

    def __radd__(self, other):
        return BinOp("+", _wrap(other), self)

    def __sub__(self, other):
        return BinOp("-", self, _wrap(other))

    def __rsub__(self, other):
        return BinOp("-", _wrap(other), self)

    def __mul__(self, other):
        return BinOp("*", self, _wrap(other))

    def __rmul__(self, other):
        return BinOp("*", _wrap(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, _wrap(other))

    def __rtruediv__(self, other):
        return BinOp("/", _wrap(other), self)

    def __pow__(self, other):
        return BinOp("^", self, _wrap(other))

    def __neg__(self):
        return Neg(self)


def _wrap(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Num(float(x))


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | lparen | rparen | comma | end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    while k < n and src[k].isdigit():
                        k += 1
                    j = k
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprError("SyntaxError", i, f"bad number literal {text!r}")
            tokens.append(_Token("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("ident", src[i:j], i))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        if ch == ",":
            tokens.append(_Token("comma", ch, i))
            i += 1
            continue
        raise ExprError("SyntaxError", i, f"unexpected character {ch!r}")
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Pratt parser
# ---------------------------------------------------------------------------

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25  # unary minus: tighter than * /, looser than ^
_CONSTANTS = {"pi": math.pi, "e": math.e}


class _Parser:
    def __init__(self, tokens: list[_Token], variables: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.varmap = {name: i for i, name in enumerate(variables)}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprError(
                "SyntaxError", tok.pos, f"expected {kind}, found {tok.text or 'end'!r}"
            )
        return self.advance()

    def parse_expr(self, min_bp: int = 0) -> Expr:
        left = self.parse_prefix()
        while True:
            tok = self.peek()
            if tok.kind != "op":
                break
            bp = _BINARY_BP[tok.text]
            if bp < min_bp:
                break
            self.advance()
            # right-associative ^ recurses at the same binding power
            next_bp = bp if tok.text == "^" else bp + 1
            right = self.parse_expr(next_bp)
            left = BinOp(tok.text, left, right)
        return left

    def parse_prefix(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "-":
            return Neg(self.parse_expr(_UNARY_BP))
        if tok.kind == "op" and tok.text == "+":
            return self.parse_expr(_UNARY_BP)
        if tok.kind == "lparen":
            inner = self.parse_expr(0)
            self.expect("rparen")
            return inner
        if tok.kind == "ident":
            if self.peek().kind == "lparen":
                if tok.text not in FUNCTIONS:
                    raise ExprError(
                        "UnknownIdentifier", tok.pos, f"unknown function {tok.text!r}"
                    )
                self.advance()
                arg = self.parse_expr(0)
                if self.peek().kind == "comma":
                    raise ExprError(
                        "ArityMismatch", self.peek().pos,
                        f"{tok.text} takes exactly one argument",
                    )
                self.expect("rparen")
                return Call(tok.text, arg)
            if tok.text in self.varmap:
                return Var(self.varmap[tok.text], tok.text)
            if tok.text in _CONSTANTS:
                return Num(_CONSTANTS[tok.text])
            if tok.text in FUNCTIONS:
                raise ExprError(
                    "ArityMismatch", tok.pos, f"{tok.text} requires an argument list"
                )
            raise ExprError(
                "UnknownIdentifier", tok.pos, f"unknown variable {tok.text!r}"
            )
        raise ExprError(
            "SyntaxError", tok.pos, f"unexpected {tok.text or 'end of input'!r}"
        )


def parse(src: str, variables: Sequence[str]) -> Expr:
    """Parse an expression string over the given ordered variable names."""
    parser = _Parser(_tokenize(src), variables)
    expr = parser.parse_expr(0)
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprError("SyntaxError", tok.pos, f"trailing input {tok.text!r}")
    return expr


# ---------------------------------------------------------------------------
# Pretty printer (parse . pretty . parse is the identity on valid input)
# ---------------------------------------------------------------------------


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _BINARY_BP[e.op]
    if isinstance(e, Neg):
        return _UNARY_BP
    return 100


def pretty(e: Expr) -> str:
    if isinstance(e, Num):
        if e.value < 0:
            return f"(-{abs(e.value)!r})"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = pretty(e.arg)
        if _prec(e.arg) < _UNARY_BP or isinstance(e.arg, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.func}({pretty(e.arg)})"
    if isinstance(e, BinOp):
        bp = _BINARY_BP[e.op]
        left = pretty(e.left)
        right = pretty(e.right)
        # left operand parenthesized if looser; for left-assoc ops the right
        # operand needs parens at equal precedence (and vice versa for ^)
        if _prec(e.left) < bp or (e.op == "^" and _prec(e.left) <= bp):
            left = f"({left})"
        if _prec(e.right) < bp or (e.op != "^" and _prec(e.right) <= bp):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an Expr node: {e!r}")


# ---------------------------------------------------------------------------
# Generic evaluation
# ---------------------------------------------------------------------------

def shift_vars(e: Expr, offset: int) -> Expr:
    """Re-index every variable by `offset` (for product charts)."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return Var(e.index + offset, f"x{e.index + offset}")
    if isinstance(e, Neg):
        return Neg(shift_vars(e.arg, offset))
    if isinstance(e, Call):
        return Call(e.func, shift_vars(e.arg, offset))
    if isinstance(e, BinOp):
        return BinOp(e.op, shift_vars(e.left, offset), shift_vars(e.right, offset))
    raise TypeError(f"not an Expr node: {e!r}")


Scalar = Union[float, DualNumber, Jet2]

_MATH_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "cosh": math.cosh,
    "sinh": math.sinh,
}


def _apply_func(name: str, x: Scalar) -> Scalar:
    if isinstance(x, (DualNumber, Jet2)):
        if name == "abs":
            return abs(x)
        return getattr(x, name)()
    if name == "log" and x <= 0.0:
        raise DomainError("log of a non-positive value")
    if name == "sqrt" and x < 0.0:
        raise DomainError("sqrt of a negative value")
    if name == "tan" and math.cos(x) == 0.0:
        raise DomainError("tan at a pole")
    return _MATH_FUNCS[name](x)


def _eval(e: Expr, point: Sequence[Scalar]) -> Scalar:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return point[e.index]
    if isinstance(e, Neg):
        return -_eval(e.arg, point)
    if isinstance(e, Call):
        return _apply_func(e.func, _eval(e.arg, point))
    if isinstance(e, BinOp):
        a = _eval(e.left, point)
        b = _eval(e.right, point)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if isinstance(b, float) and b == 0.0:
                raise DomainError("division by zero")
            return a / b
        if e.op == "^":
            if isinstance(a, (DualNumber, Jet2)) or isinstance(b, (DualNumber, Jet2)):
                if not isinstance(a, (DualNumber, Jet2)):
                    a = _promote_like(b, a)
                return a ** b
            if not float(b).is_integer() and a <= 0.0:
                raise DomainError("non-integer power of a non-positive base")
            if a == 0.0 and b < 0.0:
                raise DomainError("division by zero")
            return a ** b
    raise TypeError(f"not an Expr node: {e!r}")


def _promote_like(template: Scalar, value: float) -> Scalar:
    if isinstance(template, DualNumber):
        return DualNumber(float(value), np.zeros_like(template.partials))
    if isinstance(template, Jet2):
        return Jet2(
            float(value), np.zeros_like(template.grad), np.zeros_like(template.hess)
        )
    return float(value)


def eval_expr(e: Expr, point: Sequence[float]) -> float:
    """Evaluate to a float; raises DomainError rather than returning NaN."""
    out = _eval(e, [float(x) for x in point])
    if math.isnan(out):
        raise DomainError("evaluation produced NaN")
    return float(out)


def eval_dual(e: Expr, point: Sequence[float]) -> DualNumber:
    """Evaluate with exact first partials with respect to every variable."""
    n = len(point)
    duals = [DualNumber.variable(float(x), i, n) for i, x in enumerate(point)]
    out = _eval(e, duals)
    if not isinstance(out, DualNumber):
        out = DualNumber(float(out), np.zeros(n))
    return out


def eval_jet2(e: Expr, point: Sequence[float]) -> Jet2:
    """Evaluate with exact gradient and Hessian."""
    n = len(point)
    jets = [Jet2.variable(float(x), i, n) for i, x in enumerate(point)]
    out = _eval(e, jets)
    if not isinstance(out, Jet2):
        out = Jet2(float(out), np.zeros(n), np.zeros((n, n)))
    return out
