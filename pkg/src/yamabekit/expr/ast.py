"""Expression tree nodes and the canonical printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

FUNCTIONS = frozenset({"sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh"})
CONSTANTS = {"pi": 3.141592653589793, "e": 2.718281828459045}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Sym, Neg, BinOp, Call]

# binding powers shared with the parser
PRECEDENCE = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
UNARY = 30


def add(a, b):
    return BinOp("+", a, b)


def sub(a, b):
    return BinOp("-", a, b)


def mul(a, b):
    return BinOp("*", a, b)


def div(a, b):
    return BinOp("/", a, b)


def pow_(a, b):
    return BinOp("^", a, b)


def symbols(e: Expr) -> frozenset[str]:
    """Names of all symbols referenced by ``e``."""
    if isinstance(e, Sym):
        return frozenset({e.name})
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Neg):
        return symbols(e.operand)
    if isinstance(e, Call):
        return symbols(e.arg)
    return symbols(e.left) | symbols(e.right)


def _fmt_num(v: float) -> str:
    if v < 0:
        return f"(-{_fmt_num(-v)})"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return PRECEDENCE[e.op]
    if isinstance(e, Neg):
        return UNARY
    return 100


def to_source(e: Expr) -> str:
    """Print ``e`` so that parsing the text rebuilds the same tree."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < UNARY or isinstance(e.operand, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    p = PRECEDENCE[e.op]
    left, right = to_source(e.left), to_source(e.right)
    lp, rp = _prec(e.left), _prec(e.right)
    if e.op == "^":
        # right associative: a^b^c == a^(b^c)
        if lp <= p:
            left = f"({left})"
        if rp < p or isinstance(e.right, Neg):
            right = f"({right})"
    else:
        if lp < p:
            left = f"({left})"
        if rp <= p or isinstance(e.right, Neg):
            right = f"({right})"
    return f"{left}{e.op}{right}" if e.op in "*/^" else f"{left} {e.op} {right}"
