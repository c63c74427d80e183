"""Curvature of a chart metric, evaluated pointwise through jets.

Every quantity is carried as a jet field around the evaluation point, so
covariant derivatives of curvature tensors are exact (no differencing): a
metric jet of order ``K`` yields Christoffel symbols of order ``K-1``,
Riemann of order ``K-2``, Cotton of order ``K-3`` and so on.

Index conventions
-----------------
``christoffel[k, i, j] = Gamma^k_ij``.  ``riemann[i, j, k, l] = R_ijkl`` with
``R_ijij`` the sectional curvature of the (i, j) plane (positive on round
spheres); ``ricci[i, j] = g^pq R_ipjq``.  Covariant derivatives put the
derivative slot first: ``nabla(T)[m, ...] = nabla_m T_...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from ..expr import Expr, Jet, einsum, inverse, parse
from .metric import DimensionError, MetricField, TensorValue

_LETTERS = "abcdefghij"


def _reindex(t: Jet, spec: str) -> Jet:
    """Permute tensor axes of a jet with an einsum-style spec, e.g. 'ijl->lij'."""
    src, dst = spec.split("->")
    return t._like(np.einsum(f"{src}z->{dst}z", t.coeffs))


def covariant_derivative(t: Jet, gamma: Jet) -> Jet:
    """``nabla_m T_{i1..ir}`` for a fully covariant jet tensor field."""
    out = t.gradient()
    rank = len(t.shape)
    idx = _LETTERS[:rank]
    for s in range(rank):
        t_sub = idx[:s] + "p" + idx[s + 1:]
        out = out - einsum(f"pm{idx[s]},{t_sub}->m{idx}", gamma, t)
    return out


class CurvatureFields:
    """Lazily computed curvature jets of ``metric`` around ``point``.

    Parameters
    ----------
    metric : MetricField
    point : sequence of float
    order : int
        Jet order of the metric.  Cotton needs 3, Bach 4, the divergence of
        Bach 5 and its double divergence 6.
    """

    def __init__(self, metric: MetricField, point, order: int = 4):
        self.metric = metric
        self.point = tuple(float(x) for x in point)
        self.order = order
        self.n = metric.dim
        self.g = metric.jet(self.point, order)

    # connection -----------------------------------------------------------
    @cached_property
    def ginv(self) -> Jet:
        return inverse(self.g)

    @cached_property
    def christoffel(self) -> Jet:
        dg = self.g.gradient()  # dg[m, a, b] = d_m g_ab
        first = 0.5 * (
            _reindex(dg, "ijl->lij") + _reindex(dg, "jil->lij") - dg
        )  # Gamma_{l i j}
        return einsum("kl,lij->kij", self.ginv, first)

    def nabla(self, t: Jet) -> Jet:
        return covariant_derivative(t, self.christoffel)

    # curvature ------------------------------------------------------------
    @cached_property
    def riemann_up(self) -> Jet:
        """``R^l_{ijk}`` of ``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``."""
        gam = self.christoffel
        dgam = gam.gradient()  # dgam[i, l, j, k] = d_i Gamma^l_jk
        quad = einsum("lim,mjk->lijk", gam, gam)
        return (
            _reindex(dgam, "iljk->lijk")
            - _reindex(dgam, "jlik->lijk")
            + quad
            - _reindex(quad, "ljik->lijk")
        )

    @cached_property
    def riemann(self) -> Jet:
        return einsum("km,mijl->ijkl", self.g, self.riemann_up)

    @cached_property
    def ricci(self) -> Jet:
        return einsum("pq,ipjq->ij", self.ginv, self.riemann)

    @cached_property
    def scalar(self) -> Jet:
        return einsum("ij,ij->", self.ginv, self.ricci)

    @cached_property
    def schouten(self) -> Jet:
        return self.ricci - self.scalar * self.g / (2.0 * (self.n - 1))

    def _kulkarni(self, s: Jet) -> Jet:
        """``S_ik g_jl + S_jl g_ik - S_il g_jk - S_jk g_il``."""
        g = self.g
        a = einsum("ik,jl->ijkl", s, g)
        b = einsum("il,jk->ijkl", s, g)
        return a + _reindex(a, "jilk->ijkl") - b - _reindex(b, "jilk->ijkl")

    @cached_property
    def weyl(self) -> Jet:
        if self.n < 3:
            raise DimensionError("Weyl tensor needs n >= 3")
        # (n-2)^-1 (Schouten wedge g): the plain wedge is only right for n = 3
        return self.riemann - self._kulkarni(self.schouten) / (self.n - 2.0)

    @cached_property
    def cotton(self) -> Jet:
        ds = self.nabla(self.schouten)  # ds[i, j, k] = nabla_i S_jk
        return ds - _reindex(ds, "jik->ijk")

    @cached_property
    def cotton_from_ricci(self) -> Jet:
        """Cotton tensor assembled from ``nabla Ric`` and ``nabla R``."""
        dric = self.nabla(self.ricci)
        dr = self.scalar.gradient()
        g = self.g
        corr = einsum("jk,i->ijk", g, dr)
        return (dric - _reindex(dric, "jik->ijk")) - (corr - _reindex(corr, "jik->ijk")) / (
            2.0 * (self.n - 1)
        )

    @cached_property
    def div_cotton(self) -> Jet:
        """``nabla^k C_kij``."""
        return einsum("lk,lkij->ij", self.ginv, self.nabla(self.cotton))

    @cached_property
    def weyl_ricci_term(self) -> Jet:
        """``R_kl W_i^k_j^l``."""
        ric_up = einsum("ka,kl->al", self.ginv, self.ricci)
        ric_up = einsum("lb,al->ab", self.ginv, ric_up)
        return einsum("ab,iajb->ij", ric_up, self.weyl)

    @cached_property
    def bach(self) -> Jet:
        """Bach tensor: ``nabla_k C_kij`` in dimension 3, Cotton form for n >= 4."""
        if self.n == 3:
            return self.div_cotton
        return (self.div_cotton + self.weyl_ricci_term) / (self.n - 2.0)

    @cached_property
    def bach_weyl_form(self) -> Jet:
        """``1/(n-3) nabla^k nabla^l W_ikjl + 1/(n-2) R_kl W_i^k_j^l`` (n >= 4 only)."""
        if self.n < 4:
            raise DimensionError("the Weyl form of the Bach tensor needs n >= 4 (1/(n-3))")
        ddw = self.nabla(self.nabla(self.weyl))  # [a, b, i, k, j, l]
        x = einsum("ak,abikjl->bijl", self.ginv, ddw)
        y = einsum("bl,bijl->ij", self.ginv, x)
        return y / (self.n - 3.0) + self.weyl_ricci_term / (self.n - 2.0)

    # scalar fields ----------------------------------------------------------
    def scalar_field(self, f) -> Jet:
        if isinstance(f, str):
            f = parse(f, list(self.metric.coords) + list(self.metric.params))
        return self.metric.expr_jet(f, self.point, self.order)

    def hessian_of(self, f: Jet) -> Jet:
        return self.nabla(f.gradient())

    def laplacian_of(self, f: Jet) -> Jet:
        return einsum("ij,ij->", self.ginv, self.hessian_of(f))

    def inner(self, a: Jet, b: Jet) -> Jet:
        """``g^ij a_i b_j`` for two one-form fields."""
        return einsum("i,i->", einsum("ij,j->i", self.ginv, b), a)

    def norm_sq(self, t: Jet) -> Jet:
        """Squared norm of a covariant tensor, all indices raised with ``g``."""
        up = t
        for s in range(len(t.shape)):
            idx = _LETTERS[: len(t.shape)]
            sub = idx[:s] + "p" + idx[s + 1:]
            up = einsum(f"{idx[s]}p,{sub}->{idx}", self.ginv, up)
        idx = _LETTERS[: len(t.shape)]
        return einsum(f"{idx},{idx}->", t, up)

    def pack(self, bach: bool | None = None) -> "CurvaturePack":
        """Values at the point of everything the jet order allows."""
        k = self.order
        want_bach = (k >= 4) if bach is None else bach
        return CurvaturePack(
            point=self.point,
            metric=self.g.value,
            inverse_metric=self.ginv.value,
            christoffel=self.christoffel.value if k >= 1 else None,
            riemann=self.riemann.value if k >= 2 else None,
            ricci=self.ricci.value if k >= 2 else None,
            scalar=self.scalar.value if k >= 2 else None,
            schouten=self.schouten.value if k >= 2 and self.n >= 3 else None,
            weyl=self.weyl.value if k >= 2 and self.n >= 3 else None,
            cotton=self.cotton.value if k >= 3 and self.n >= 3 else None,
            bach=self.bach.value if want_bach and k >= 4 and self.n >= 3 else None,
        )


@dataclass(frozen=True)
class CurvaturePack:
    point: tuple[float, ...]
    metric: np.ndarray
    inverse_metric: np.ndarray
    christoffel: Optional[np.ndarray]
    riemann: Optional[np.ndarray]
    ricci: Optional[np.ndarray]
    scalar: Optional[float]
    schouten: Optional[np.ndarray]
    weyl: Optional[np.ndarray]
    cotton: Optional[np.ndarray]
    bach: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            out[name] = np.asarray(v).tolist() if v is not None else None
        return out


# pointwise operations ----------------------------------------------------


def _tv(fields: CurvatureFields, variance: str, jet: Jet) -> TensorValue:
    return TensorValue(fields.point, variance, jet.value)


def curvature_pack(m: MetricField, p, order: int = 4) -> CurvaturePack:
    return CurvatureFields(m, p, order).pack()


def christoffel(m: MetricField, p) -> TensorValue:
    f = CurvatureFields(m, p, 1)
    return _tv(f, "udd", f.christoffel)


def riemann(m: MetricField, p) -> TensorValue:
    f = CurvatureFields(m, p, 2)
    return _tv(f, "dddd", f.riemann)


def ricci_scalar(m: MetricField, p) -> tuple[TensorValue, float]:
    f = CurvatureFields(m, p, 2)
    return _tv(f, "dd", f.ricci), f.scalar.value


def schouten(m: MetricField, p) -> TensorValue:
    if m.dim < 3:
        raise DimensionError("Schouten tensor needs n >= 3")
    f = CurvatureFields(m, p, 2)
    return _tv(f, "dd", f.schouten)


def weyl(m: MetricField, p) -> TensorValue:
    if m.dim < 3:
        raise DimensionError("Weyl tensor needs n >= 3")
    f = CurvatureFields(m, p, 2)
    return _tv(f, "dddd", f.weyl)


def cotton(m: MetricField, p) -> TensorValue:
    if m.dim < 3:
        raise DimensionError("Cotton tensor needs n >= 3")
    f = CurvatureFields(m, p, 3)
    return _tv(f, "ddd", f.cotton)


def bach(m: MetricField, p, form: str = "auto") -> TensorValue:
    """Bach tensor at ``p``.

    ``form`` is ``"auto"`` (dimension-appropriate), ``"cotton"`` or ``"weyl"``;
    the Weyl form carries ``1/(n-3)`` and is rejected for n = 3.
    """
    if m.dim < 3:
        raise DimensionError("Bach tensor needs n >= 3")
    f = CurvatureFields(m, p, 4)
    if form == "weyl":
        return _tv(f, "dd", f.bach_weyl_form)
    if form not in ("auto", "cotton"):
        raise ValueError(f"unknown Bach form {form!r}")
    return _tv(f, "dd", f.bach)


def _as_expr(m: MetricField, f) -> Expr:
    if isinstance(f, str):
        return parse(f, list(m.coords) + list(m.params))
    return f


def hessian(m: MetricField, f, p) -> TensorValue:
    fields = CurvatureFields(m, p, 1)
    fj = m.expr_jet(_as_expr(m, f), fields.point, 2)
    return _tv(fields, "dd", fields.hessian_of(fj))


def laplacian(m: MetricField, f, p) -> float:
    fields = CurvatureFields(m, p, 1)
    fj = m.expr_jet(_as_expr(m, f), fields.point, 2)
    return fields.laplacian_of(fj).value


def grad_inner(m: MetricField, f, h, p) -> float:
    fields = CurvatureFields(m, p, 0)
    fj = m.expr_jet(_as_expr(m, f), fields.point, 1)
    hj = m.expr_jet(_as_expr(m, h), fields.point, 1)
    return fields.inner(fj.gradient(), hj.gradient()).value
