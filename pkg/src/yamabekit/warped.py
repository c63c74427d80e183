"""Closed-form curvature of warped products ``dr^2 + F'(r)^2 gbar``.

The fiber ``(N, gbar)`` has dimension ``n - 1`` and constant curvature, so
its scalar curvature ``Rbar`` fixes everything:
``Rbar_abcd = kappa (gbar_ac gbar_bd - gbar_ad gbar_bc)`` with
``kappa = Rbar / ((n-1)(n-2))``.  Charts place ``r`` first, fiber
coordinates after.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .expr import Expr, eval_jet, parse, to_source
from .geometry import CurvatureFields, DimensionError, MetricField
from .soliton import SolitonSpec, kind_of


class WarpedProfileError(ValueError):
    pass


@dataclass(frozen=True)
class WarpedProfilePoint:
    """Radial data at one radius: ``d1 = F'``, ``d2 = F''``, ``d3 = F'''`` (and ``d4``)."""

    n: int
    fiber_scalar: float
    r: float
    d1: float
    d2: float
    d3: float
    d4: float | None = None

    def __post_init__(self):
        if self.n < 3:
            raise DimensionError(f"warped products here need n >= 3, got {self.n}")
        if not self.d1 > 0:
            raise WarpedProfileError(f"F' must be positive, got {self.d1!r} at r = {self.r!r}")

    @classmethod
    def from_expression(
        cls,
        fprime: str | Expr,
        n: int,
        fiber_scalar: float,
        r: float,
        params: Mapping[str, float] | None = None,
    ) -> "WarpedProfilePoint":
        """Exact derivatives of an ``F'(r)`` expression via an order-3 jet."""
        params = dict(params or {})
        e = parse(fprime, ["r", *params]) if isinstance(fprime, str) else fprime
        j = eval_jet(e, ["r"], [r], params, order=3)
        d = [j.partial((k,)) for k in range(4)]
        return cls(n, float(fiber_scalar), float(r), d[0], d[1], d[2], d[3])

    @property
    def fiber_kappa(self) -> float:
        m = self.n - 1
        return self.fiber_scalar / (m * (m - 1))


@dataclass(frozen=True)
class WarpedCurvature:
    """Block-structured curvature of a warped product at one radius.

    Coefficients multiply the fiber metric:
    ``R_1a1b = radial_sectional * gbar_ab``,
    ``R_abcd = fiber_sectional * (gbar_ac gbar_bd - gbar_ad gbar_bc)``,
    ``R_ab = ricci_fiber * gbar_ab``.
    """

    point: WarpedProfilePoint
    radial_sectional: float
    fiber_sectional: float
    ricci_radial: float
    ricci_fiber: float
    scalar: float
    fiber_sectional_2d: float | None = None
    ricci_fiber_2d: float | None = None

    def riemann(self, gbar: np.ndarray) -> np.ndarray:
        n = self.point.n
        gbar = np.asarray(gbar, dtype=float)
        out = np.zeros((n,) * 4)
        rad = self.radial_sectional * gbar
        out[0, 1:, 0, 1:] = rad
        out[1:, 0, 1:, 0] = rad
        out[0, 1:, 1:, 0] = -rad
        out[1:, 0, 0, 1:] = -rad
        out[1:, 1:, 1:, 1:] = self.fiber_sectional * (
            np.einsum("ac,bd->abcd", gbar, gbar) - np.einsum("ad,bc->abcd", gbar, gbar)
        )
        return out

    def ricci(self, gbar: np.ndarray) -> np.ndarray:
        n = self.point.n
        out = np.zeros((n, n))
        out[0, 0] = self.ricci_radial
        out[1:, 1:] = self.ricci_fiber * np.asarray(gbar, dtype=float)
        return out


def closed_form_curvature(w: WarpedProfilePoint) -> WarpedCurvature:
    """Riemann/Ricci/scalar curvature from ``F', F'', F'''`` and ``Rbar``."""
    n, rbar = w.n, w.fiber_scalar
    f1, f2, f3 = w.d1, w.d2, w.d3
    radial = -f1 * f3
    fiber = f1**2 * w.fiber_kappa - (f1 * f2) ** 2
    ric11 = -(n - 1) * f3 / f1
    ric_ab = rbar / (n - 1) - ((n - 2) * f2**2 + f1 * f3)
    scalar = rbar / f1**2 - (n - 1) * (n - 2) * (f2 / f1) ** 2 - 2 * (n - 1) * f3 / f1
    fiber2 = ric2 = None
    if n == 3:
        # 2D fiber: Rbar_ab = Rbar/2 gbar_ab; rewrite through R
        fiber2 = f1**3 * (0.5 * f1 * scalar + 2 * f3)
        ric2 = 0.5 * scalar * f1**2 + f1 * f3
    return WarpedCurvature(w, radial, fiber, ric11, ric_ab, scalar, fiber2, ric2)


@dataclass(frozen=True)
class RadialCotton:
    """``c = R F'^2/4 + F' F'''`` and Cotton data of a warped 3-metric.

    ``cotton_component`` is the coefficient of ``gbar_ab`` in
    ``C_1ab = nabla_1 S_ab - nabla_a S_1b`` (with ``C_a1b = -C_1ab``), the only
    block that can be nonzero.  ``dc_dr`` is the plain radial derivative of
    ``c``; it is *not* a Cotton component: ``C_1ab`` also collects connection
    terms, and over a constant-curvature fiber it vanishes for every profile.
    """

    c: float
    cotton_component: float
    dc_dr: float

    def cotton(self) -> np.ndarray:
        """Full ``C_ijk`` in a chart whose fiber metric is the identity at the point."""
        out = np.zeros((3, 3, 3))
        for a in (1, 2):
            out[0, a, a] = self.cotton_component
            out[a, 0, a] = -self.cotton_component
        return out


def radial_cotton_c(w: WarpedProfilePoint) -> RadialCotton:
    if w.n != 3:
        raise DimensionError(f"radial_cotton_c is defined for n = 3, got n = {w.n}")
    f1, f2, f3, rbar = w.d1, w.d2, w.d3, w.fiber_scalar
    cf = closed_form_curvature(w)
    R = cf.scalar
    c = 0.25 * R * f1**2 + f1 * f3
    if w.d4 is not None:
        f4 = w.d4
        dR = (
            -2 * rbar * f2 / f1**3
            - 4 * (f2 / f1) * (f3 * f1 - f2**2) / f1**2
            - 4 * (f4 * f1 - f3 * f2) / f1**2
        )
        dc = 0.25 * dR * f1**2 + 0.5 * R * f1 * f2 + f2 * f3 + f1 * f4
    else:
        dc = -f2 * f3  # from c = Rbar/4 - F''^2/2
    s11 = cf.ricci_radial - 0.25 * R
    # nabla_1 S_ab = (c' - 2 (F''/F') c) gbar_ab ;  nabla_a S_1b = (-(F''/F') c + F'F'' S_11) gbar_ab
    comp = dc - (f2 / f1) * c - f1 * f2 * s11
    return RadialCotton(c, comp, dc)


def radial_laplacian_R(w: WarpedProfilePoint, dR: float, ddR: float) -> float:
    """``Lap R = R'' + (n-1) (F''/F') R'`` for a radial function."""
    return ddR + (w.n - 1) * (w.d2 / w.d1) * dR


def ric_radial(w: WarpedProfilePoint) -> float:
    """``Ric(nabla F, nabla F) = F'^2 R_11 = -(n-1) F' F'''``."""
    return -(w.n - 1) * w.d1 * w.d3


# explicit charts ------------------------------------------------------------


def fiber_chart(m: int, fiber_scalar: float) -> tuple[list[str], list[str], dict, tuple]:
    """Coordinates, diagonal entries, parameters and a box for a constant-curvature fiber.

    Spherical polar angles for positive curvature, the upper half space for
    negative curvature, Cartesian coordinates for zero.
    """
    if m < 2:
        raise DimensionError("fiber dimension must be >= 2")
    kappa = fiber_scalar / (m * (m - 1))
    coords = [f"t{k + 2}" for k in range(m)]
    if kappa > 0:
        entries, prefix = [], ""
        for k, c in enumerate(coords):
            entries.append(f"{prefix}1/kappa" if prefix else "1/kappa")
            prefix += f"sin({c})^2*"
        box = tuple((0.3, np.pi - 0.3) for _ in coords[:-1]) + ((0.0, 2 * np.pi),)
        return coords, entries, {"kappa": kappa}, box
    if kappa < 0:
        last = coords[-1]
        entries = [f"1/(kneg*{last}^2)" for _ in coords]
        box = tuple((-1.0, 1.0) for _ in coords[:-1]) + ((0.5, 2.0),)
        return coords, entries, {"kneg": -kappa}, box
    return coords, ["1" for _ in coords], {}, tuple((-1.0, 1.0) for _ in coords)


def default_fiber_point(m: int, fiber_scalar: float) -> tuple[float, ...]:
    if fiber_scalar > 0:
        return tuple([1.1, 0.9, 1.2, 1.0, 0.8][: m - 1]) + (0.4,)
    if fiber_scalar < 0:
        return tuple([0.3, -0.2, 0.1, 0.25][: m - 1]) + (1.3,)
    return tuple([0.1 * (k + 1) for k in range(m)])


def warped_metric(
    fprime: str,
    n: int,
    fiber_scalar: float,
    params: Mapping[str, float] | None = None,
    potential: str | None = None,
) -> MetricField:
    """Explicit chart ``(r, t2, ..., tn)`` of ``dr^2 + F'(r)^2 gbar``."""
    coords, entries, fparams, _ = fiber_chart(n - 1, fiber_scalar)
    all_params = dict(fparams)
    all_params.update(params or {})
    diag = ["1"] + [f"({fprime})^2*{e}" for e in entries]
    return MetricField.diagonal(["r", *coords], diag, all_params, potential)


def fiber_metric_at(n: int, fiber_scalar: float, fiber_point: Sequence[float]) -> np.ndarray:
    coords, entries, fparams, _ = fiber_chart(n - 1, fiber_scalar)
    fb = MetricField.diagonal(coords, entries, fparams)
    return fb.jet(fiber_point, 0).value


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    """Max abs difference relative to ``max(1, max|b|)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max() / max(1.0, float(np.abs(b).max())))


@dataclass(frozen=True)
class CrossCheckReport:
    fprime: str
    n: int
    fiber_scalar: float
    radii: tuple[float, ...]
    riemann: float
    ricci: float
    scalar: float
    cotton: float | None

    def worst(self) -> float:
        vals = [self.riemann, self.ricci, self.scalar]
        if self.cotton is not None:
            vals.append(self.cotton)
        return max(vals)

    def as_dict(self) -> dict:
        return {
            "fprime": self.fprime,
            "n": self.n,
            "fiber_scalar": self.fiber_scalar,
            "radii": list(self.radii),
            "riemann": self.riemann,
            "ricci": self.ricci,
            "scalar": self.scalar,
            "cotton": self.cotton,
        }


def cross_check(
    fprime: str,
    n: int,
    fiber_scalar: float,
    r_range: tuple[float, float] = (0.2, 2.0),
    resolution: int = 8,
    fiber_point: Sequence[float] | None = None,
    params: Mapping[str, float] | None = None,
) -> CrossCheckReport:
    """Compare closed forms with the generic engine on the explicit chart.

    Discrepancies are maxima over ``resolution`` radii of
    ``max|closed - generic| / max(1, max|generic|)``.
    """
    metric = warped_metric(fprime, n, fiber_scalar, params)
    fiber_point = tuple(fiber_point or default_fiber_point(n - 1, fiber_scalar))
    gbar = fiber_metric_at(n, fiber_scalar, fiber_point)
    radii = tuple(float(r) for r in np.linspace(*r_range, resolution))
    worst = {"riemann": 0.0, "ricci": 0.0, "scalar": 0.0, "cotton": 0.0}
    for r in radii:
        w = WarpedProfilePoint.from_expression(fprime, n, fiber_scalar, r, params)
        cf = closed_form_curvature(w)
        f = CurvatureFields(metric, (r, *fiber_point), 3 if n == 3 else 2)
        worst["riemann"] = max(worst["riemann"], _rel(cf.riemann(gbar), f.riemann.value))
        worst["ricci"] = max(worst["ricci"], _rel(cf.ricci(gbar), f.ricci.value))
        worst["scalar"] = max(worst["scalar"], _rel(cf.scalar, f.scalar.value))
        if n == 3:
            rc = radial_cotton_c(w)
            closed = np.zeros((3, 3, 3))
            closed[0, 1:, 1:] = rc.cotton_component * gbar
            closed[1:, 0, 1:] = -rc.cotton_component * gbar
            worst["cotton"] = max(worst["cotton"], _rel(closed, f.cotton.value))
    return CrossCheckReport(
        fprime if isinstance(fprime, str) else to_source(fprime),
        n,
        float(fiber_scalar),
        radii,
        worst["riemann"],
        worst["ricci"],
        worst["scalar"],
        worst["cotton"] if n == 3 else None,
    )


def build_product_soliton(kind: str, a: float, rho: float) -> SolitonSpec:
    """The product soliton ``dr^2 + a^2 gbar`` with ``F = a r`` and ``Rbar = rho a^2``.

    ``gbar`` is a round sphere (``rho > 0``) or hyperbolic plane
    (``rho < 0``) of Gaussian curvature ``rho a^2 / 2``; after scaling by
    ``a^2`` the fiber factor has Gaussian curvature ``rho / 2`` and the
    total scalar curvature is ``rho``.  Both normalizations are recorded in
    ``info``.
    """
    if kind not in ("shrinking", "expanding"):
        raise ValueError(f"product solitons are shrinking or expanding, got {kind!r}")
    if not a > 0:
        raise ValueError(f"|grad F| must be positive, got {a!r}")
    if kind_of(rho) != kind:
        raise ValueError(f"{kind} product soliton needs rho {'> 0' if kind == 'shrinking' else '< 0'}, got {rho!r}")
    rbar = rho * a * a
    coords, entries, fparams, fbox = fiber_chart(2, rbar)
    params = dict(fparams)
    params["a"] = float(a)
    diag = ["1"] + [f"a^2*{e}" for e in entries]
    metric = MetricField.diagonal(["r", *coords], diag, params)
    info = {
        "fiber_scalar_curvature": rbar,
        "fiber_gaussian_curvature_gbar": rbar / 2,
        "fiber_gaussian_curvature_scaled": rho / 2,
        "grad_F": float(a),
    }
    return SolitonSpec(metric, parse("a*r", ["r", *coords, *params]), float(rho), kind, ((-2.0, 2.0),) + fbox, info)
