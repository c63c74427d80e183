"""Radial profile ODE for gradient Yamabe solitons on warped products.

The state is ``(F, phi, dphi)`` with ``phi = F'`` and ``dphi = F''``; the
third derivative is fixed algebraically by the scalar-curvature formula of
the warped product together with the soliton relation ``R = rho + F''``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrator import Solution, dopri5


class ProfileError(ValueError):
    pass


class SingularStateError(ProfileError, ArithmeticError):
    """The warping function ``phi = F'`` is not positive."""


class TrajectoryTooShortError(ProfileError):
    pass


CSV_COLUMNS = ("r", "Fp", "Fpp", "Fppp", "R", "c", "res_R2", "res_key3")
LABELS = (
    "flat",
    "rotationally_symmetric_candidate",
    "shrinking_product",
    "expanding_product",
    "steady_contradiction",
    "unclassified",
)


@dataclass(frozen=True)
class ODEState:
    r: float
    phi: float
    dphi: float
    ddphi: Optional[float] = None
    F: float = 0.0


def _check_n(n: int) -> int:
    if int(n) != n or n < 3:
        raise ProfileError(f"dimension must be an integer >= 3, got {n!r}")
    return int(n)


def profile_rhs(n: int, fiber_scalar: float, rho: float, phi, dphi):
    """Return ``phi''`` for the given ``(phi, phi')``; works elementwise on arrays."""
    m = _check_n(n) - 1
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    if np.any(~(phi > 0)):
        raise SingularStateError(f"phi = F' must be positive, got {phi.min() if phi.size else phi!r}")
    out = phi * ((fiber_scalar - m * (m - 1) * dphi**2) / phi**2 - rho - dphi) / (2 * m)
    return float(out) if out.ndim == 0 else out


def profile_system(n: int, fiber_scalar: float, rho: float):
    """First-order system ``d/dr (F, phi, phi') = (phi, phi', phi'')``."""

    def fun(r, y):
        return np.array([y[1], y[2], profile_rhs(n, fiber_scalar, rho, y[1], y[2])])

    return fun


def scalar_from_state(n: int, fiber_scalar: float, phi, dphi, ddphi):
    """Scalar curvature of ``dr^2 + phi^2 gbar`` from the profile derivatives."""
    m = n - 1
    # grouped numerator: the two fiber terms nearly cancel close to a smooth origin
    return (fiber_scalar - m * (m - 1) * dphi**2) / phi**2 - 2 * m * ddphi / phi


def ricci_gradient(n: int, phi, ddphi):
    """``Ric(grad F, grad F)`` for radial ``F`` with ``F' = phi``."""
    return -(n - 1) * phi * ddphi


def origin_series_start(n: int, fiber_scalar: float, rho: float, eps: float = 1e-2, terms: int = 3) -> ODEState:
    """State at ``r = eps`` of the odd series solution closing smoothly at the origin.

    ``phi = r + a r^3 + b r^5 + O(r^7)`` with ``m = n - 1``,
    ``a = -(1 + rho) / (6 m (m + 1))`` and
    ``b = (1 + rho)(m rho + 7m + 3 rho + 9) / (120 m^2 (m + 1)^2 (m + 3))``.
    ``terms=2`` drops the quintic term.  The fiber must be the unit round sphere.
    """
    n = _check_n(n)
    m = n - 1
    if not math.isclose(fiber_scalar, m * (m - 1), rel_tol=1e-12, abs_tol=1e-12):
        raise ProfileError(
            f"smooth closure at the origin needs the unit round sphere fiber "
            f"(fiber scalar curvature {m * (m - 1)}), got {fiber_scalar!r}"
        )
    if not eps > 0:
        raise ProfileError(f"eps must be positive, got {eps!r}")
    a = -(1.0 + rho) / (6.0 * m * (m + 1))
    b = (1.0 + rho) * (m * rho + 7 * m + 3 * rho + 9) / (120.0 * m**2 * (m + 1) ** 2 * (m + 3))
    if terms < 3:
        b = 0.0
    return ODEState(
        r=eps,
        phi=eps + a * eps**3 + b * eps**5,
        dphi=1.0 + 3 * a * eps**2 + 5 * b * eps**4,
        ddphi=6 * a * eps + 20 * b * eps**3,
        F=eps**2 / 2 + a * eps**4 / 4 + b * eps**6 / 6,
    )


def _stencil_weights(offsets) -> np.ndarray:
    """First-derivative finite-difference weights for integer ``offsets`` (unit spacing)."""
    offsets = np.asarray(offsets, dtype=float)
    k = len(offsets)
    v = np.vander(offsets, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[1] = 1.0
    return np.linalg.solve(v, rhs)


_CENTRED = np.arange(-2, 3)


@dataclass
class ProfileTrajectory:
    n: int
    fiber_scalar: float
    rho: float
    r: np.ndarray
    F: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    R: np.ndarray
    R_soliton: np.ndarray
    c: np.ndarray
    res_key3: np.ndarray
    res_R2: np.ndarray
    ric_grad: np.ndarray
    status: str
    origin_start: bool = False
    metadata: dict = field(default_factory=dict)
    solution: Optional[Solution] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.r)

    @property
    def final_state(self) -> ODEState:
        return ODEState(float(self.r[-1]), float(self.phi[-1]), float(self.dphi[-1]), float(self.ddphi[-1]), float(self.F[-1]))

    def rows(self):
        cols = (self.r, self.phi, self.dphi, self.ddphi, self.R, self.c, self.res_R2, self.res_key3)
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.r))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows():
            w.writerow([repr(v) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def col(a):
            return [None if not np.isfinite(v) else float(v) for v in a]

        return {
            "n": self.n,
            "fiber_scalar": self.fiber_scalar,
            "rho": self.rho,
            "status": self.status,
            "origin_start": self.origin_start,
            "metadata": self.metadata,
            "columns": {
                "r": col(self.r),
                "F": col(self.F),
                "Fp": col(self.phi),
                "Fpp": col(self.dphi),
                "Fppp": col(self.ddphi),
                "R": col(self.R),
                "R_soliton": col(self.R_soliton),
                "c": col(self.c),
                "res_R2": col(self.res_R2),
                "res_key3": col(self.res_key3),
                "ric_grad": col(self.ric_grad),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _r2_residual(sol: Solution, n: int, fiber_scalar: float, rho: float, r, phi, dphi, ddphi, delta):
    """Residual of the second-order scalar-curvature identity at each sample.

    ``R' = phi''`` is exact at the samples; ``R''`` is a five-point derivative
    of ``phi''`` along the dense output, one-sided near the ends.
    """
    lo, hi = sol.t[0], sol.t[-1]
    span = hi - lo
    if span < 8 * delta:
        delta = span / 8
    out = np.empty_like(r)
    m = n - 1
    cache = {}
    for i, ri in enumerate(r):
        shift = 0
        if ri - 2 * delta < lo:
            shift = min(2, int(math.ceil((lo - (ri - 2 * delta)) / delta - 1e-12)))
        elif ri + 2 * delta > hi:
            shift = -min(2, int(math.ceil((ri + 2 * delta - hi) / delta - 1e-12)))
        offs = _CENTRED + shift
        if shift not in cache:
            cache[shift] = _stencil_weights(offs)
        rr = np.clip(ri + offs * delta, lo, hi)
        ys = sol.dense(rr)
        g = profile_rhs(n, fiber_scalar, rho, ys[:, 1], ys[:, 2])
        out[i] = cache[shift] @ g / delta
    R = rho + dphi
    dR = ddphi
    predicted = -m * dphi / phi * dR - phi * dR / (2 * m) - R * (R - rho) / m
    return np.abs(out - predicted) / np.maximum(1.0, np.abs(predicted))


def integrate(
    n: int,
    fiber_scalar: float,
    rho: float,
    ic: ODEState,
    r_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    phi_floor: float = 1e-6,
    blowup: float = 1e8,
    origin_start: bool = False,
    stencil_step: float = 1e-3,
) -> ProfileTrajectory:
    """Integrate the profile ODE from ``ic`` to ``r_end`` and populate diagnostics.

    Status is ``completed``, ``singularity`` (``phi`` fell below ``phi_floor``)
    or ``blowup`` (a state component exceeded ``blowup``).  A step underflow
    propagates as :class:`StepUnderflowError` with the last accepted state.
    """
    n = _check_n(n)
    if not (rtol > 0 and atol > 0 and math.isfinite(rtol) and math.isfinite(atol)):
        raise ProfileError(f"invalid tolerances rtol={rtol!r}, atol={atol!r}")
    if not ic.phi > 0:
        raise SingularStateError(f"initial phi must be positive, got {ic.phi!r}")
    if not r_end > ic.r:
        raise ProfileError(f"r_end ({r_end!r}) must exceed the initial radius ({ic.r!r})")

    def halt(t, y):
        if y[1] < phi_floor:
            return "singularity"
        if np.max(np.abs(y)) > blowup:
            return "blowup"
        return None

    sol = dopri5(
        profile_system(n, fiber_scalar, rho),
        ic.r,
        [ic.F, ic.phi, ic.dphi],
        r_end,
        rtol=rtol,
        atol=atol,
        valid=lambda y: y[1] > 0,
        halt=halt,
    )
    return _trajectory_from_solution(sol, n, fiber_scalar, rho, origin_start, stencil_step)


def _trajectory_from_solution(sol, n, fiber_scalar, rho, origin_start, stencil_step):
    r = sol.t
    F, phi, dphi = sol.y[:, 0], sol.y[:, 1], sol.y[:, 2]
    ddphi = sol.f[:, 2]
    R = scalar_from_state(n, fiber_scalar, phi, dphi, ddphi)
    R_sol = rho + dphi
    if n == 3:
        c = R * phi**2 / 4 + phi * ddphi
        res_key3 = np.abs(R * phi**2 / 4 - c)
    else:
        c = np.full_like(r, np.nan)
        res_key3 = np.full_like(r, np.nan)
    if len(r) >= 3:
        res_r2 = _r2_residual(sol, n, fiber_scalar, rho, r, phi, dphi, ddphi, stencil_step)
    else:
        res_r2 = np.full_like(r, np.nan)
    meta = {
        "method": "dopri5",
        "steps": sol.n_steps,
        "rejected_steps": sol.n_rejected,
        "function_evaluations": sol.n_fev,
        "rtol": sol.rtol,
        "atol": sol.atol,
        "message": sol.message,
    }
    return ProfileTrajectory(
        n=n,
        fiber_scalar=float(fiber_scalar),
        rho=float(rho),
        r=r,
        F=F,
        phi=phi,
        dphi=dphi,
        ddphi=ddphi,
        R=R,
        R_soliton=R_sol,
        c=c,
        res_key3=res_key3,
        res_R2=res_r2,
        ric_grad=ricci_gradient(n, phi, ddphi),
        status=sol.status,
        origin_start=origin_start,
        metadata=meta,
        solution=sol,
    )


def shoot_from_origin(n: int, rho: float, r_end: float, eps: float = 1e-2, **kwargs) -> ProfileTrajectory:
    """Integrate the rotationally symmetric profile closing at the origin."""
    fiber_scalar = float((n - 1) * (n - 2))
    ic = origin_series_start(n, fiber_scalar, rho, eps)
    return integrate(n, fiber_scalar, rho, ic, r_end, origin_start=True, **kwargs)


@dataclass
class InvariantReport:
    samples: int
    c_drift: Optional[float]
    key3_residual: Optional[float]
    key3_samples: int
    r2_residual: float
    scalar_two_way: float
    ric_sign: np.ndarray
    sign_lemma_holds: bool

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "c_drift": self.c_drift,
            "key3_residual": self.key3_residual,
            "key3_samples": self.key3_samples,
            "r2_residual": self.r2_residual,
            "scalar_two_way": self.scalar_two_way,
            "sign_lemma_holds": self.sign_lemma_holds,
        }


def track_invariants(t: ProfileTrajectory, flat_tol: float = 1e-6) -> InvariantReport:
    """Summarize conserved-quantity drift and identity residuals along ``t``.

    The balance residual is taken over samples with ``|phi'| <= flat_tol``.
    """
    if len(t) < 3:
        raise TrajectoryTooShortError(f"need at least 3 samples for the R'' estimate, got {len(t)}")
    c_drift = key3 = None
    k3n = 0
    if t.n == 3:
        c_drift = float(np.max(np.abs(t.c - t.c[0])))
        mask = np.abs(t.dphi) <= flat_tol
        k3n = int(mask.sum())
        if k3n:
            key3 = float(np.max(t.res_key3[mask]))
    scale = np.maximum(1.0, np.abs(t.R_soliton))
    two_way = float(np.max(np.abs(t.R - t.R_soliton) / scale))
    sign = np.sign(t.ric_grad)
    lemma = bool(np.all((t.ric_grad <= 0) == (t.ddphi >= 0)))
    return InvariantReport(
        samples=len(t),
        c_drift=c_drift,
        key3_residual=key3,
        key3_samples=k3n,
        r2_residual=float(np.max(t.res_R2)),
        scalar_two_way=two_way,
        ric_sign=sign,
        sign_lemma_holds=lemma,
    )


@dataclass
class Classification:
    label: str
    evidence: dict
    tolerances: dict

    def as_dict(self) -> dict:
        return {"label": self.label, "evidence": self.evidence, "tolerances": self.tolerances}


def classify(t: ProfileTrajectory, rho: Optional[float] = None, tol: float = 1e-6) -> Classification:
    """Assign a case of the warped-product classification to a trajectory."""
    rho = t.rho if rho is None else float(rho)
    n = t.n
    max_R = float(np.max(np.abs(t.R)))
    max_dphi = float(np.max(np.abs(t.dphi)))
    max_R_rho = float(np.max(np.abs(t.R - rho)))
    fiber_part = (t.fiber_scalar - (n - 1) * (n - 2) * t.dphi**2) / t.phi**2
    radial_part = t.ddphi / t.phi
    ev = {
        "max_abs_R": max_R,
        "max_abs_dphi": max_dphi,
        "max_abs_R_minus_rho": max_R_rho,
        "max_abs_fiber_curvature": float(np.max(np.abs(fiber_part))),
        "max_abs_radial_curvature": float(np.max(np.abs(radial_part))),
        "rho": rho,
        "status": t.status,
        "origin_start": t.origin_start,
        "fired": [],
    }
    if n == 3:
        ev["max_abs_c"] = float(np.max(np.abs(t.c)))
        flat_curv = ev["max_abs_c"] <= tol
    else:
        flat_curv = ev["max_abs_fiber_curvature"] <= tol and ev["max_abs_radial_curvature"] <= tol
    tols = {"tol": tol}

    def done(label, *fired):
        ev["fired"] = list(fired)
        return Classification(label, ev, tols)

    if flat_curv and max_R <= tol:
        return done("flat", "max|c| <= tol" if n == 3 else "max|sectional| <= tol", "max|R| <= tol")
    if max_dphi <= tol and max_R_rho <= tol:
        if rho > 0:
            return done("shrinking_product", "max|phi'| <= tol", "max|R - rho| <= tol", "rho > 0")
        if rho < 0:
            return done("expanding_product", "max|phi'| <= tol", "max|R - rho| <= tol", "rho < 0")
    if rho == 0 and max_dphi <= tol and not flat_curv:
        return done("steady_contradiction", "rho == 0", "max|phi'| <= tol", "curvature not flat")
    if t.origin_start:
        return done("rotationally_symmetric_candidate", "origin series start")
    return done("unclassified")
