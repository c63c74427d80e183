"""Pratt parser for the analytic-expression language.

Precedence, loosest to tightest: ``+ -`` < ``* /`` < unary ``-`` < ``^``.
Binary operators associate to the left except ``^``.
"""

from __future__ import annotations

import re
from typing import Iterable

from .ast import CONSTANTS, FUNCTIONS, PRECEDENCE, UNARY, BinOp, Call, Expr, Neg, Num, Sym


class ExprError(ValueError):
    """Base class for expression errors; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int | None = None, source: str | None = None):
        self.offset = offset
        self.source = source
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class ExprSyntaxError(ExprError):
    pass


class UnknownSymbolError(ExprError):
    pass


class UnknownFunctionError(ExprError):
    pass


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


class _Parser:
    def __init__(self, source: str, declared: frozenset[str]):
        self.source = source
        self.declared = declared
        self.tokens = self._tokenize()
        self.pos = 0

    def _byte_offset(self, char_index: int) -> int:
        return len(self.source[:char_index].encode("utf-8"))

    def _error(self, cls, message, char_index):
        return cls(message, self._byte_offset(char_index), self.source)

    def _tokenize(self):
        src = self.source
        tokens = []
        i = 0
        while i < len(src):
            m = _TOKEN.match(src, i)
            if m is None or m.end() == i:
                j = i
                while j < len(src) and src[j].isspace():
                    j += 1
                if j == len(src):
                    break
                raise self._error(ExprSyntaxError, f"unexpected character {src[j]!r}", j)
            kind = m.lastgroup
            if kind is None:  # trailing whitespace only
                break
            tokens.append((kind, m.group(kind), m.start(kind)))
            i = m.end()
        tokens.append(("end", "", len(src)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        kind, value, at = self.advance()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise self._error(ExprSyntaxError, f"expected {text!r}, found {found}", at)

    def parse(self, rbp: int = 0) -> Expr:
        left = self.nud(self.advance())
        while True:
            kind, value, _ = self.peek()
            if kind != "op" or value not in PRECEDENCE or PRECEDENCE[value] <= rbp:
                return left
            self.advance()
            lbp = PRECEDENCE[value]
            right = self.parse(lbp - 1 if value == "^" else lbp)
            left = BinOp(value, left, right)

    def nud(self, tok) -> Expr:
        kind, value, at = tok
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if value not in FUNCTIONS:
                    raise self._error(UnknownFunctionError, f"unknown function {value!r}", at)
                self.advance()
                arg = self.parse()
                self.expect(")")
                return Call(value, arg)
            if value in FUNCTIONS:
                raise self._error(ExprSyntaxError, f"function {value!r} needs an argument", at)
            if value not in self.declared and value not in CONSTANTS:
                raise self._error(UnknownSymbolError, f"unknown symbol {value!r}", at)
            return Sym(value)
        if kind == "op" and value == "-":
            return Neg(self.parse(UNARY))
        if kind == "op" and value == "(":
            inner = self.parse()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(value)
        raise self._error(ExprSyntaxError, f"unexpected {found}", at)


def parse(source: str, declared_symbols: Iterable[str] = ()) -> Expr:
    """Parse ``source`` into an expression tree.

    Every bare name must be in ``declared_symbols`` (coordinates and
    parameters) or be one of the built-in constants ``pi`` and ``e``.

    >>> parse("r^2*sin(theta)^2", ["r", "theta"])  # doctest: +ELLIPSIS
    BinOp(op='*', left=BinOp(op='^', ...
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0, source)
    p = _Parser(source, frozenset(declared_symbols))
    expr = p.parse()
    kind, value, at = p.peek()
    if kind != "end":
        raise p._error(ExprSyntaxError, f"unexpected {value!r}", at)
    return expr
