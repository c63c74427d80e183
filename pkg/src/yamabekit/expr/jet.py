"""Truncated multivariate Taylor polynomials ("jets").

A :class:`Jet` stores the Taylor coefficients ``d^alpha f / alpha!`` of a
scalar field at a base point, for every multi-index ``alpha`` of total
degree at most ``order``.  Coefficients live on the last axis of a numpy
array; any leading axes are tensor slots, so a whole tensor field (say the
metric ``g_ij``) is a single ``Jet`` of shape ``(n, n)``.

Multi-indices are stored in graded order (all degree-0 terms, then degree 1,
...), which makes truncation to a lower order a prefix slice.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "Jet",
    "JetError",
    "JetDomainError",
    "multi_indices",
    "n_coefficients",
    "jet_arith",
    "jet_apply",
    "partial",
    "einsum",
    "stack",
    "inverse",
    "ELEMENTARY",
]


class JetError(ValueError):
    """Incompatible jets (dimension, order or base point)."""


class JetDomainError(ArithmeticError):
    """An elementary function was applied outside its domain."""


def n_coefficients(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, in graded order."""
    out = []
    for degree in range(order + 1):
        for combo in combinations_with_replacement(range(dim), degree):
            alpha = [0] * dim
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return tuple(out)


@lru_cache(maxsize=None)
def _index_map(dim: int, order: int) -> dict[tuple[int, ...], int]:
    return {alpha: k for k, alpha in enumerate(multi_indices(dim, order))}


@lru_cache(maxsize=None)
def _product_table(dim: int, order: int):
    """Pairs (a, b) contributing to each product coefficient, sorted by target."""
    alphas = multi_indices(dim, order)
    index = _index_map(dim, order)
    left, right, target = [], [], []
    for i, a in enumerate(alphas):
        da = sum(a)
        for j, b in enumerate(alphas):
            if da + sum(b) > order:
                continue
            left.append(i)
            right.append(j)
            target.append(index[tuple(x + y for x, y in zip(a, b))])
    order_ = np.argsort(np.asarray(target), kind="stable")
    left = np.asarray(left)[order_]
    right = np.asarray(right)[order_]
    target = np.asarray(target)[order_]
    starts = np.searchsorted(target, np.arange(len(alphas)))
    return left, right, starts


@lru_cache(maxsize=None)
def _diff_table(dim: int, order: int, axis: int):
    """Source indices and factors for d/dx_axis, mapping order -> order-1."""
    index = _index_map(dim, order)
    src, fac = [], []
    for gamma in multi_indices(dim, order - 1):
        up = list(gamma)
        up[axis] += 1
        src.append(index[tuple(up)])
        fac.append(float(up[axis]))
    return np.asarray(src), np.asarray(fac)


class Jet:
    """Truncated Taylor expansion of a (possibly tensor-valued) field.

    Parameters
    ----------
    coeffs : array_like
        Shape ``shape + (n_coefficients(dim, order),)``.
    dim : int
        Number of coordinates.
    order : int
        Maximal total derivative degree carried.
    base : tuple of float, optional
        Base point; checked for agreement in binary operations when both
        operands carry one.
    """

    __slots__ = ("coeffs", "dim", "order", "base")
    __array_priority__ = 1000

    def __init__(self, coeffs, dim: int, order: int, base=None):
        coeffs = np.asarray(coeffs, dtype=float)
        if order < 0:
            raise JetError(f"order must be >= 0, got {order}")
        ncoef = n_coefficients(dim, order)
        if coeffs.ndim == 0 or coeffs.shape[-1] != ncoef:
            raise JetError(
                f"expected trailing axis of length {ncoef} for dim={dim}, "
                f"order={order}; got shape {coeffs.shape}"
            )
        self.coeffs = coeffs
        self.dim = dim
        self.order = order
        self.base = None if base is None else tuple(float(x) for x in base)

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, dim: int, order: int, base=None) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (n_coefficients(dim, order),))
        coeffs[..., 0] = value
        return cls(coeffs, dim, order, base)

    @classmethod
    def variable(cls, axis: int, base, order: int) -> "Jet":
        """The coordinate function ``x_axis`` expanded at ``base``."""
        base = tuple(float(x) for x in base)
        dim = len(base)
        coeffs = np.zeros(n_coefficients(dim, order))
        coeffs[0] = base[axis]
        if order >= 1:
            coeffs[1 + axis] = 1.0
        return cls(coeffs, dim, order, base)

    def _like(self, coeffs, order=None) -> "Jet":
        return Jet(coeffs, self.dim, self.order if order is None else order, self.base)

    # basic properties ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        """Degree-0 coefficient(s): the plain value at the base point."""
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order})"

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return self._like(self.coeffs[key + (slice(None),)])

    def __len__(self) -> int:
        return self.shape[0]

    def coefficient(self, alpha):
        alpha = tuple(alpha)
        if len(alpha) != self.dim:
            raise JetError(f"multi-index {alpha} has wrong length for dim={self.dim}")
        if sum(alpha) > self.order:
            return np.zeros(self.shape) if self.shape else 0.0
        c = self.coeffs[..., _index_map(self.dim, self.order)[alpha]]
        return float(c) if c.ndim == 0 else c.copy()

    def as_dict(self) -> dict[tuple[int, ...], float]:
        """Scalar jets only: multi-index -> coefficient."""
        if self.shape:
            raise JetError("as_dict() needs a scalar jet")
        return {a: float(c) for a, c in zip(multi_indices(self.dim, self.order), self.coeffs)}

    # structural ops -----------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise order {self.order} to {order}")
        if order == self.order:
            return self
        m = n_coefficients(self.dim, order)
        return self._like(self.coeffs[..., :m], order)

    def transpose(self, *axes) -> "Jet":
        axes = tuple(axes) if axes else tuple(reversed(range(len(self.shape))))
        return self._like(np.transpose(self.coeffs, axes + (len(self.shape),)))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(len(self.shape)))
        return self._like(self.coeffs.sum(axis=axis))

    def diff(self, axis: int) -> "Jet":
        """Partial derivative along coordinate ``axis``; the order drops by one."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        src, fac = _diff_table(self.dim, self.order, axis)
        return self._like(self.coeffs[..., src] * fac, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of all first partials; the new derivative axis comes first."""
        return stack([self.diff(i) for i in range(self.dim)])

    def partial(self, alpha):
        return partial(self, alpha)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            _check_compatible(self, other)
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.coeffs.copy()
            c[..., 0] = c[..., 0] + np.asarray(other, dtype=float)
            return self._like(c)
        a, b = _common_order(self, o)
        return a._like(a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return self._like(self.coeffs * np.asarray(other, dtype=float)[..., None])
        return _mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return self * (1.0 / np.asarray(other, dtype=float))
        return _mul(self, o.reciprocal())

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return jet_apply("exp", p * jet_apply("log", self))
        p = float(p)
        if p.is_integer():
            return self.ipow(int(p))
        return self.rpow(p)

    def ipow(self, k: int) -> "Jet":
        """Integer power by repeated squaring (negative k via reciprocal)."""
        base = self.reciprocal() if k < 0 else self
        k = abs(k)
        result = Jet.constant(np.ones(self.shape), self.dim, self.order, self.base)
        while k:
            if k & 1:
                result = _mul(result, base)
            k >>= 1
            if k:
                base = _mul(base, base)
        return result

    def rpow(self, p: float) -> "Jet":
        """Real power ``self**p`` as exp(p log self); needs a positive value."""
        return jet_apply("exp", jet_apply("log", self) * p)

    def reciprocal(self) -> "Jet":
        return jet_apply("recip", self)


def _check_compatible(a: Jet, b: Jet) -> None:
    if a.dim != b.dim:
        raise JetError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.base is not None and b.base is not None and not np.allclose(
        a.base, b.base, rtol=0.0, atol=0.0
    ):
        raise JetError(f"base point mismatch: {a.base} vs {b.base}")


def _common_order(a: Jet, b: Jet) -> tuple[Jet, Jet]:
    k = min(a.order, b.order)
    return a.truncate(k), b.truncate(k)


def _mul(a: Jet, b: Jet) -> Jet:
    a, b = _common_order(a, b)
    left, right, starts = _product_table(a.dim, a.order)
    prod = a.coeffs[..., left] * b.coeffs[..., right]
    out = np.add.reduceat(prod, starts, axis=-1)
    base = a.base if a.base is not None else b.base
    return Jet(out, a.dim, a.order, base)


def einsum(subscripts: str, a: Jet, b) -> Jet:
    """Tensor contraction of two jet-valued arrays.

    ``subscripts`` names only the tensor axes (``"ij,jk->ik"``); the jet
    coefficient axis is handled implicitly with the truncated Cauchy product.
    ``b`` may be a plain ndarray, in which case it is treated as constant.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if not isinstance(b, Jet):
        return a._like(np.einsum(f"{sa}z,{sb}->{out}z", a.coeffs, np.asarray(b, dtype=float)))
    _check_compatible(a, b)
    a, b = _common_order(a, b)
    left, right, starts = _product_table(a.dim, a.order)
    prod = np.einsum(
        f"{sa}z,{sb}z->{out}z", a.coeffs[..., left], b.coeffs[..., right], optimize=True
    )
    out_c = np.add.reduceat(prod, starts, axis=-1)
    return Jet(out_c, a.dim, a.order, a.base if a.base is not None else b.base)


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    k = min(j.order for j in jets)
    first = jets[0]
    for j in jets[1:]:
        _check_compatible(first, j)
    if axis < 0:
        axis += len(first.shape) + 1
    coeffs = np.stack([j.truncate(k).coeffs for j in jets], axis=axis)
    return Jet(coeffs, first.dim, k, first.base)


def inverse(m: Jet) -> Jet:
    """Inverse of a jet-valued square matrix (leading shape ``(n, n)``).

    With ``m = m0 + h`` and ``h`` free of constant terms the Neumann series
    ``sum_k (-m0^{-1} h)^k m0^{-1}`` terminates after ``order`` terms.
    """
    n = m.shape[0]
    if m.shape != (n, n):
        raise JetError(f"inverse() needs an (n, n) jet, got {m.shape}")
    m0 = m.coeffs[..., 0]
    m0inv = np.linalg.inv(m0)
    h = m - m0
    step = h._like(-np.einsum("ij,jkz->ikz", m0inv, h.coeffs))
    term = Jet.constant(m0inv, m.dim, m.order, m.base)
    result = term
    for _ in range(m.order):
        term = einsum("ij,jk->ik", step, term)
        result = result + term
    return result


# univariate Taylor coefficients ------------------------------------------


def _series_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Univariate power-series quotient along the last axis."""
    q = np.zeros_like(num)
    for k in range(num.shape[-1]):
        acc = num[..., k] - sum(q[..., j] * den[..., k - j] for j in range(k))
        q[..., k] = acc / den[..., 0]
    return q


def _taylor_sin_cos(x0, order, hyperbolic=False):
    s, c = (np.sinh(x0), np.cosh(x0)) if hyperbolic else (np.sin(x0), np.cos(x0))
    sgn = 1.0 if hyperbolic else -1.0
    cycle_s = [s, c, sgn * s, sgn * c]
    cycle_c = [c, sgn * s, sgn * c, s * sgn * sgn]
    fs = np.stack([cycle_s[k % 4] / math.factorial(k) for k in range(order + 1)], axis=-1)
    fc = np.stack([cycle_c[k % 4] / math.factorial(k) for k in range(order + 1)], axis=-1)
    return fs, fc


def _taylor(name: str, x0: np.ndarray, order: int) -> np.ndarray:
    """Coefficients f^(k)(x0)/k!, k = 0..order, stacked on a new last axis."""
    ks = np.arange(order + 1)
    if name == "exp":
        return np.exp(x0)[..., None] / np.array([math.factorial(k) for k in ks])
    if name == "log":
        out = np.empty(x0.shape + (order + 1,))
        out[..., 0] = np.log(x0)
        for k in range(1, order + 1):
            out[..., k] = (-1.0) ** (k + 1) / (k * x0**k)
        return out
    if name == "recip":
        return np.stack([(-1.0) ** k / x0 ** (k + 1) for k in ks], axis=-1)
    if name == "sqrt":
        out = np.empty(x0.shape + (order + 1,))
        root = np.sqrt(x0)
        coef = 1.0
        for k in ks:
            out[..., k] = coef * root / x0**k if k else root
            coef *= (0.5 - k) / (k + 1)
        return out
    if name in ("sin", "cos"):
        fs, fc = _taylor_sin_cos(x0, order)
        return fs if name == "sin" else fc
    if name in ("sinh", "cosh"):
        fs, fc = _taylor_sin_cos(x0, order, hyperbolic=True)
        return fs if name == "sinh" else fc
    if name == "tan":
        fs, fc = _taylor_sin_cos(x0, order)
        return _series_div(fs, fc)
    if name == "tanh":
        fs, fc = _taylor_sin_cos(x0, order, hyperbolic=True)
        return _series_div(fs, fc)
    raise KeyError(name)


def _check_domain(name: str, x0: np.ndarray, order: int) -> None:
    bad = None
    if name == "log" and np.any(x0 <= 0):
        bad = "log of a non-positive value"
    elif name == "sqrt" and (np.any(x0 < 0) or (order > 0 and np.any(x0 == 0))):
        bad = "sqrt of a negative value" if np.any(x0 < 0) else "sqrt is not differentiable at 0"
    elif name == "recip" and np.any(x0 == 0):
        bad = "division by a jet with zero constant term"
    elif name == "tan" and np.any(np.cos(x0) == 0):
        bad = "tan at a pole"
    if bad:
        raise JetDomainError(bad)


ELEMENTARY = ("exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh", "recip")


def jet_apply(f: str, a: Jet) -> Jet:
    """Compose an elementary function with a jet.

    The univariate Taylor coefficients of ``f`` at the constant term are
    combined with the nilpotent remainder by Horner's scheme.
    """
    if f not in ELEMENTARY:
        raise KeyError(f"unknown elementary function {f!r}")
    x0 = a.coeffs[..., 0]
    _check_domain(f, x0, a.order)
    with np.errstate(all="ignore"):
        t = _taylor(f, x0, a.order)
    h = a - x0
    result = Jet.constant(t[..., a.order], a.dim, a.order, a.base)
    for k in range(a.order - 1, -1, -1):
        result = _mul(result, h) + t[..., k]
    return result


_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Ring arithmetic on jets that must agree in dim, order and base point."""
    if a.dim != b.dim or a.order != b.order:
        raise JetError(f"mismatched jets: (d={a.dim}, K={a.order}) vs (d={b.dim}, K={b.order})")
    if a.base != b.base:
        raise JetError(f"base point mismatch: {a.base} vs {b.base}")
    return _OPS[op](a, b)


def partial(a: Jet, alpha):
    """The raw partial derivative ``d^alpha f`` (``alpha! * coefficient``)."""
    alpha = tuple(int(x) for x in alpha)
    if not alpha:
        alpha = (0,) * a.dim
    if sum(alpha) > a.order:
        raise JetError(f"|alpha| = {sum(alpha)} exceeds jet order {a.order}")
    fact = math.prod(math.factorial(k) for k in alpha)
    return fact * a.coefficient(alpha)
