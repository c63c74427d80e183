"""Evaluation of expression trees, either as floats or as jets."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .ast import CONSTANTS, Call, Expr, Neg, Num, Sym, to_source
from .jet import Jet, JetDomainError, jet_apply


class EvaluationError(ArithmeticError):
    """Evaluation failed inside ``subtree`` (printed form in ``where``)."""

    def __init__(self, message: str, subtree: Expr | None = None):
        self.subtree = subtree
        self.where = to_source(subtree) if subtree is not None else None
        suffix = f" in subexpression {self.where!r}" if self.where else ""
        super().__init__(f"{message}{suffix}")


class DomainViolation(EvaluationError):
    pass


class UnboundSymbolError(EvaluationError, KeyError):
    def __str__(self):  # KeyError would otherwise repr() the message
        return self.args[0]


def _lookup(name: str, env: Mapping[str, object], node: Expr):
    if name in env:
        return env[name]
    if name in CONSTANTS:
        return CONSTANTS[name]
    raise UnboundSymbolError(f"symbol {name!r} is not bound", node)


def _integer_exponent(e: Expr, env) -> int | None:
    """Exponent value if it is a coordinate-free integer, else None."""
    try:
        v = evaluate(e, env)
    except EvaluationError:
        return None
    return int(v) if float(v).is_integer() and abs(v) <= 1024 else None


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """Plain floating-point evaluation."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        return float(_lookup(e.name, env, e))
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    if isinstance(e, Call):
        x = evaluate(e.arg, env)
        try:
            if e.func == "log" and x <= 0:
                raise ValueError
            if e.func == "sqrt" and x < 0:
                raise ValueError
            return float(getattr(math, e.func)(x))
        except (ValueError, OverflowError):
            raise DomainViolation(f"{e.func} undefined at {x!r}", e) from None
    a = evaluate(e.left, env)
    b = evaluate(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0:
            raise DomainViolation("division by zero", e)
        return a / b
    if float(b).is_integer():
        if a == 0 and b < 0:
            raise DomainViolation("zero to a negative power", e)
        return a ** int(b)
    if a <= 0:
        raise DomainViolation("non-integer power of a non-positive base", e)
    return math.exp(b * math.log(a))


def eval_jet(
    e: Expr,
    coords: Sequence[str],
    base: Sequence[float],
    params: Mapping[str, float] | None = None,
    order: int = 4,
) -> Jet:
    """Taylor-expand ``e`` at ``base`` up to total degree ``order``.

    Parameters
    ----------
    e : Expr
        Parsed expression.
    coords : sequence of str
        Coordinate names; position fixes the jet axis.
    base : sequence of float
        Expansion point, one value per coordinate.
    params : mapping, optional
        Values for named parameters (treated as constants).
    order : int
        Truncation order ``K``.

    Returns
    -------
    Jet
        Coefficients ``d^alpha e / alpha!`` at ``base``.

    Raises
    ------
    DomainViolation
        With the offending subtree, e.g. ``log`` of a non-positive value.
    UnboundSymbolError
        If a symbol is neither a coordinate nor a parameter.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    base = tuple(float(x) for x in base)
    if len(base) != len(coords):
        raise ValueError(f"base has {len(base)} entries for {len(coords)} coordinates")
    env: dict[str, object] = dict(params or {})
    for i, name in enumerate(coords):
        env[name] = Jet.variable(i, base, order)
    return _jet(e, env, len(base), order, base)


def _const(v, dim, order, base):
    return Jet.constant(v, dim, order, base)


def _jet(e: Expr, env, dim, order, base) -> Jet:
    if isinstance(e, Num):
        return _const(e.value, dim, order, base)
    if isinstance(e, Sym):
        v = _lookup(e.name, env, e)
        return v if isinstance(v, Jet) else _const(float(v), dim, order, base)
    if isinstance(e, Neg):
        return -_jet(e.operand, env, dim, order, base)
    if isinstance(e, Call):
        a = _jet(e.arg, env, dim, order, base)
        try:
            return jet_apply(e.func, a)
        except JetDomainError as exc:
            raise DomainViolation(str(exc), e) from None
    a = _jet(e.left, env, dim, order, base)
    if e.op == "^":
        k = _integer_exponent(e.right, {n: v for n, v in env.items() if not isinstance(v, Jet)})
        try:
            if k is not None:
                return a.ipow(k)
            b = _jet(e.right, env, dim, order, base)
            if a.value <= 0:
                raise JetDomainError("non-integer power of a non-positive base")
            return jet_apply("exp", b * jet_apply("log", a))
        except JetDomainError as exc:
            raise DomainViolation(str(exc), e) from None
    b = _jet(e.right, env, dim, order, base)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    try:
        return a / b
    except JetDomainError as exc:
        raise DomainViolation(str(exc), e) from None
