"""Analytic expressions and jet (truncated Taylor) evaluation."""

from .ast import BinOp, Call, Expr, Neg, Num, Sym, symbols, to_source
from .evaluate import DomainViolation, EvaluationError, UnboundSymbolError, eval_jet, evaluate
from .jet import (
    Jet,
    JetDomainError,
    JetError,
    einsum,
    inverse,
    jet_apply,
    jet_arith,
    multi_indices,
    n_coefficients,
    partial,
    stack,
)
from .parser import ExprError, ExprSyntaxError, UnknownFunctionError, UnknownSymbolError, parse

__all__ = [
    "BinOp", "Call", "Expr", "Neg", "Num", "Sym", "symbols", "to_source",
    "DomainViolation", "EvaluationError", "UnboundSymbolError", "eval_jet", "evaluate",
    "Jet", "JetDomainError", "JetError", "einsum", "inverse", "jet_apply", "jet_arith",
    "multi_indices", "n_coefficients", "partial", "stack",
    "ExprError", "ExprSyntaxError", "UnknownFunctionError", "UnknownSymbolError", "parse",
]
