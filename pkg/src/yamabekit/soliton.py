"""Gradient Yamabe soliton equation and the identities derived from it.

For a soliton ``(R - rho) g = Hess F`` the report evaluates, pointwise:

* ``YS``   the soliton equation itself (max abs entry of the residual matrix)
* ``TYS``  its trace ``n (R - rho) = Lap F``
* ``P1``   the commutation ``Lap nabla_i F = nabla_i Lap F + R_ij nabla^j F``
* ``P2``   ``(n-1) nabla_i R + R_il nabla^l F = 0``
* ``P3``   ``(n-1) <nabla R, nabla F> = -Ric(nabla F, nabla F)``
* ``P4``   ``(n-1) Lap R + <nabla R, nabla F>/2 + R (R - rho) = 0``
* ``P5``   ``Lap R = Ric(nabla F, nabla F)/(2 (n-1)^2) - R (R - rho)/(n-1)``

and, for any 3-metric, the Cotton/Bach identities ``DIVB``, ``M2`` and
``DDIV``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .expr import Expr, Jet, einsum, parse, to_source
from .geometry import CurvatureFields, DimensionError, MetricField

SOLITON_KEYS = ("YS", "TYS", "P1", "P2", "P3", "P4", "P5")
COTTON_KEYS = ("DIVB", "M2", "DDIV")
KINDS = ("shrinking", "steady", "expanding")


def kind_of(rho: float) -> str:
    return "shrinking" if rho > 0 else "expanding" if rho < 0 else "steady"


@dataclass(frozen=True)
class SolitonSpec:
    """Metric, potential ``F`` and soliton constant ``rho``.

    ``box`` is the coordinate box used for sampling; ``info`` carries
    construction metadata (e.g. fiber curvatures of product solitons).
    """

    metric: MetricField
    potential: Expr
    rho: float
    kind: str | None = None
    box: tuple[tuple[float, float], ...] | None = None
    info: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        expected = kind_of(self.rho)
        if self.kind is None:
            object.__setattr__(self, "kind", expected)
        elif self.kind not in KINDS:
            raise ValueError(f"unknown soliton kind {self.kind!r}")
        elif self.kind != expected:
            raise ValueError(f"kind {self.kind!r} does not match rho = {self.rho!r} ({expected})")
        if isinstance(self.potential, str):
            object.__setattr__(
                self,
                "potential",
                parse(self.potential, list(self.metric.coords) + list(self.metric.params)),
            )

    @property
    def dim(self) -> int:
        return self.metric.dim


def soliton_residual(s: SolitonSpec, p) -> tuple[np.ndarray, float]:
    """``Hess F - (R - rho) g`` at ``p`` and its max absolute entry."""
    f = CurvatureFields(s.metric, p, 2)
    fj = s.metric.expr_jet(s.potential, f.point, 2)
    res = f.hessian_of(fj).value - (f.scalar.value - s.rho) * f.g.value
    return res, float(np.abs(res).max())


@dataclass
class IdentityReport:
    """Pointwise residuals of a family of identities over a sample set."""

    points: list[tuple[float, ...]]
    residuals: dict[str, list[float]]
    tolerances: dict[str, float] = field(default_factory=dict)
    gate_violated: bool = False
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        for key, vals in self.residuals.items():
            for v in vals:
                if not (math.isfinite(v) and v >= 0):
                    raise ValueError(f"residual for {key} must be finite and >= 0, got {v}")

    def max_residual(self, key: str) -> float:
        return max(self.residuals[key], default=0.0)

    def worst_point(self, key: str) -> tuple[float, ...]:
        vals = self.residuals[key]
        return self.points[int(np.argmax(vals))]

    def passed(self, key: str) -> bool:
        return self.max_residual(key) <= self.tolerances[key]

    def failures(self) -> list[str]:
        return [k for k in self.residuals if k in self.tolerances and not self.passed(k)]

    def merge(self, other: "IdentityReport") -> "IdentityReport":
        if other.points != self.points:
            raise ValueError("reports cover different sample sets")
        return IdentityReport(
            self.points,
            {**self.residuals, **other.residuals},
            {**self.tolerances, **other.tolerances},
            self.gate_violated or other.gate_violated,
            self.notes + other.notes,
        )

    def summary(self) -> dict:
        out = {}
        for key in self.residuals:
            out[key] = {
                "max_residual": self.max_residual(key),
                "worst_point": list(self.worst_point(key)),
                "tolerance": self.tolerances.get(key),
                "passed": self.passed(key) if key in self.tolerances else None,
            }
        return out

    def to_json(self) -> str:
        payload = {
            "identities": self.summary(),
            "gate_violated": self.gate_violated,
            "notes": self.notes,
            "points": [list(p) for p in self.points],
            "residuals": self.residuals,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        dim = len(self.points[0]) if self.points else 0
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["identity", "point"] + [f"x{i}" for i in range(dim)] + ["residual"])
        for key, vals in self.residuals.items():
            for k, (p, v) in enumerate(zip(self.points, vals)):
                w.writerow([key, k] + [repr(float(x)) for x in p] + [repr(float(v))])
        for key in self.residuals:
            w.writerow([key, "max"] + [""] * dim + [repr(self.max_residual(key))])
        return buf.getvalue()


# finite-difference derivatives of the scalar curvature ---------------------


def _scalar_curvature(metric: MetricField, p) -> float:
    return CurvatureFields(metric, p, 2).scalar.value


def _fd_grad_hess(fun, p: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    n = len(p)
    e = np.eye(n) * h
    f0 = fun(p)
    fp = [fun(p + e[i]) for i in range(n)]
    fm = [fun(p - e[i]) for i in range(n)]
    grad = np.array([(fp[i] - fm[i]) / (2 * h) for i in range(n)])
    hess = np.empty((n, n))
    for i in range(n):
        hess[i, i] = (fp[i] - 2 * f0 + fm[i]) / h**2
        for j in range(i + 1, n):
            v = (
                fun(p + e[i] + e[j]) - fun(p + e[i] - e[j]) - fun(p - e[i] + e[j]) + fun(p - e[i] - e[j])
            ) / (4 * h**2)
            hess[i, j] = hess[j, i] = v
    return grad, hess


def fd_scalar_derivatives(metric: MetricField, p, h: float = 1e-2) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and coordinate Hessian of ``R`` by Richardson-extrapolated central differences."""
    p = np.asarray(p, dtype=float)
    fun = lambda q: _scalar_curvature(metric, q)  # noqa: E731
    g1, h1 = _fd_grad_hess(fun, p, h)
    g2, h2 = _fd_grad_hess(fun, p, h / 2)
    return (4 * g2 - g1) / 3, (4 * h2 - h1) / 3


# identity suites -------------------------------------------------------------


def _soliton_terms(f: CurvatureFields, fj: Jet, rho: float, dR: np.ndarray, lapR: float):
    """P2..P5 residuals given first derivatives and Laplacian of R."""
    n = f.n
    ginv = f.ginv.value
    ric = f.ricci.value
    R = f.scalar.value
    dF = fj.gradient().value
    dF_up = ginv @ dF
    ric_ff = float(dF_up @ ric @ dF_up)
    gRF = float(dR @ ginv @ dF)
    p2 = np.abs((n - 1) * dR + ric @ dF_up).max()
    p3 = abs((n - 1) * gRF + ric_ff)
    p4 = abs((n - 1) * lapR + 0.5 * gRF + R * (R - rho))
    p5 = abs(lapR - ric_ff / (2 * (n - 1) ** 2) + R * (R - rho) / (n - 1))
    return p2, p3, p4, p5


def identity_report(
    s: SolitonSpec,
    points: Sequence,
    gate: float = 1e-8,
    tol: float = 1e-8,
    fd_check: bool = True,
    fd_step: float = 1e-2,
) -> IdentityReport:
    """Evaluate YS, TYS and P1..P5 at every point.

    Derivatives of ``R`` come from the curvature jets.  With ``fd_check``
    they are recomputed by finite differences of ``R`` and the larger of
    the two residuals is kept.  A YS residual above ``gate`` is flagged in
    the report (the derived identities only hold for actual solitons).
    """
    res = {k: [] for k in SOLITON_KEYS}
    n = s.dim
    pts = [tuple(float(x) for x in p) for p in points]
    for p in pts:
        f = CurvatureFields(s.metric, p, 4)
        fj = s.metric.expr_jet(s.potential, f.point, 4)
        R = f.scalar
        hessF = f.hessian_of(fj)
        res["YS"].append(float(np.abs(hessF.value - (R.value - s.rho) * f.g.value).max()))
        lapF = einsum("ij,ij->", f.ginv, hessF)
        res["TYS"].append(abs(n * (R.value - s.rho) - lapF.value))

        d3F = f.nabla(hessF)  # [a, b, i] = nabla_a nabla_b nabla_i F
        rough = einsum("ab,abi->i", f.ginv, d3F).value
        dF_up = f.ginv.value @ fj.gradient().value
        p1 = rough - lapF.gradient().value - f.ricci.value @ dF_up
        res["P1"].append(float(np.abs(p1).max()))

        dR = R.gradient().value
        lapR = f.laplacian_of(R).value
        terms = _soliton_terms(f, fj, s.rho, dR, lapR)
        if fd_check:
            gfd, hfd = fd_scalar_derivatives(s.metric, p, fd_step)
            gam = f.christoffel.value
            ginv = f.ginv.value
            lap_fd = float(np.einsum("ij,ij->", ginv, hfd - np.einsum("kij,k->ij", gam, gfd)))
            fd_terms = _soliton_terms(f, fj, s.rho, gfd, lap_fd)
            terms = tuple(max(a, b) for a, b in zip(terms, fd_terms))
        for key, v in zip(("P2", "P3", "P4", "P5"), terms):
            res[key].append(float(v))
    report = IdentityReport(pts, res, {k: tol for k in SOLITON_KEYS})
    report.tolerances["YS"] = gate
    if any(v > gate for v in res["YS"]):
        report.gate_violated = True
        report.notes.append(
            f"YS residual {max(res['YS']):.3e} exceeds gate {gate:.1e}: "
            "P2-P5 are not expected to hold"
        )
    return report


def _raise_all(f: CurvatureFields, t: Jet) -> Jet:
    letters = "abcdef"[: len(t.shape)]
    up = t
    for s in range(len(t.shape)):
        sub = letters[:s] + "p" + letters[s + 1:]
        up = einsum(f"{letters[s]}p,{sub}->{letters}", f.ginv, up)
    return up


def cotton_residuals(metric: MetricField, p, order: int = 5, slow: bool = False) -> dict[str, float]:
    """DIVB and M2 at ``order`` (>= 5); DDIV as well when ``slow`` (order >= 6)."""
    if metric.dim != 3:
        raise DimensionError(f"Cotton/Bach identities are for n = 3, got n = {metric.dim}")
    order = max(order, 6 if slow else 5)
    f = CurvatureFields(metric, p, order)
    C, B, ric = f.cotton, f.bach, f.ricci
    ric_up = _raise_all(f, ric)
    dB = f.nabla(B)  # [i, a, b] = nabla_i B_ab
    divB = einsum("ia,iab->b", f.ginv, dB)
    CR = einsum("jip,ip->j", C, ric_up)
    out = {"DIVB": float(np.abs((divB + CR).value).max())}
    c_sq = einsum("ijk,ijk->", C, _raise_all(f, C))
    lhs = einsum("ijk,ijk->", _raise_all(f, C), f.nabla(ric))
    out["M2"] = abs(lhs.value - 0.5 * c_sq.value)
    if slow:
        ddB = f.nabla(dB)  # [a, b, c, d] = nabla_a nabla_b B_cd
        x = einsum("ad,abcd->bc", f.ginv, ddB)
        lhs2 = einsum("bc,bc->", f.ginv, x)  # nabla_i nabla_j B_ji
        rhs2 = -einsum("jk,jk->", B, ric_up) - 0.5 * c_sq
        out["DDIV"] = abs(lhs2.value - rhs2.value)
    return out


def cotton_identities(
    m: MetricField,
    points: Sequence,
    order: int = 5,
    slow: bool = False,
    tolerances: Mapping[str, float] | None = None,
) -> IdentityReport:
    """DIVB / M2 (and DDIV when ``slow``) over a sample set of a 3-metric."""
    if m.dim != 3:
        raise DimensionError(f"Cotton/Bach identities are for n = 3, got n = {m.dim}")
    tol = {"DIVB": 1e-5, "M2": 1e-6, "DDIV": 1e-4}
    tol.update(tolerances or {})
    keys = ["DIVB", "M2"] + (["DDIV"] if slow else [])
    res = {k: [] for k in keys}
    pts = [tuple(float(x) for x in p) for p in points]
    for p in pts:
        vals = cotton_residuals(m, p, order, slow)
        for k in keys:
            res[k].append(vals[k])
    return IdentityReport(pts, res, {k: tol[k] for k in keys})


def describe(s: SolitonSpec) -> dict:
    return {
        "coordinates": list(s.metric.coords),
        "metric": [[to_source(e) for e in row] for row in s.metric.components],
        "potential": to_source(s.potential),
        "rho": s.rho,
        "kind": s.kind,
        "info": dict(s.info),
    }
