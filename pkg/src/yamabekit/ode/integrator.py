"""Adaptive Dormand-Prince 5(4) integrator with cubic Hermite dense output."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Dormand & Prince (1980), FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class IntegrationError(ArithmeticError):
    pass


class StepUnderflowError(IntegrationError):
    """Step size fell below the floor; ``t``/``y`` hold the last accepted state."""

    def __init__(self, t: float, y: np.ndarray, h: float):
        self.t = t
        self.y = np.array(y)
        self.h = h
        super().__init__(f"step size underflow (h = {h:.3e}) at t = {t!r}, last state {self.y.tolist()}")


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    status: str
    rtol: float
    atol: float
    n_steps: int = 0
    n_rejected: int = 0
    n_fev: int = 0
    message: str = ""
    extra: dict = field(default_factory=dict)

    def dense(self, t) -> np.ndarray:
        """Cubic Hermite interpolation on the accepted steps; ``t`` may be an array."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise ValueError(f"dense output requested outside [{self.t[0]}, {self.t[-1]}]")
        k = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[k], self.t[k + 1]
        h = (t1 - t0)[:, None]
        s = ((t - t0) / (t1 - t0))[:, None]
        y0, y1 = self.y[k], self.y[k + 1]
        f0, f1 = self.f[k], self.f[k + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        return out[0] if scalar else out


def dopri5(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h0: Optional[float] = None,
    max_steps: int = 1_000_000,
    valid: Optional[Callable[[np.ndarray], bool]] = None,
    halt: Optional[Callable[[float, np.ndarray], Optional[str]]] = None,
) -> Solution:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    A step is accepted when every component of the embedded error estimate
    satisfies ``|err_i| <= atol + rtol * max(|y_i|, |y_new_i|)``.  Trial
    states rejected by ``valid`` (or with non-finite values) shrink the step.
    ``halt(t, y)`` may return a status string to stop after an accepted step.
    """
    if not (rtol > 0 and atol > 0):
        raise ValueError(f"tolerances must be positive, got rtol={rtol!r}, atol={atol!r}")
    if not t_end > t0:
        raise ValueError(f"t_end ({t_end!r}) must exceed t0 ({t0!r})")
    y = np.array(y0, dtype=float)
    t = float(t0)
    f = np.asarray(fun(t, y), dtype=float)
    nfev = 1
    span = t_end - t0
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(f) / scale)
        h0 = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h0 = min(h0, span)
    h = float(h0)
    h_min = 1e-14 * max(1.0, abs(t0), abs(t_end))
    ts, ys, fs = [t], [y.copy()], [f.copy()]
    n_rej = 0
    status, message = "completed", ""
    k = np.empty((7, y.size))
    for step in range(max_steps):
        if t >= t_end:
            break
        h = min(h, t_end - t)
        if h < h_min:
            raise StepUnderflowError(t, y, h)
        k[0] = f
        ok = True
        for i in range(1, 7):
            yi = y + h * (np.dot(_A[i], k[:i]) if i else 0.0)
            if not np.all(np.isfinite(yi)) or (valid is not None and not valid(yi)):
                ok = False
                break
            k[i] = fun(t + _C[i] * h, yi)
            nfev += 1
            if not np.all(np.isfinite(k[i])):
                ok = False
                break
        if not ok:
            n_rej += 1
            h *= 0.25
            continue
        y_new = y + h * np.dot(_B5, k)
        err = h * np.dot(_E, k)
        tol = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = np.max(np.abs(err) / tol)
        if ratio <= 1.0:
            t = t + h
            if abs(t_end - t) <= 1e-15 * max(1.0, abs(t_end)):
                t = t_end
            y = y_new
            f = k[6].copy()
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
            if halt is not None:
                s = halt(t, y)
                if s:
                    status, message = s, f"halted at t = {t!r}"
                    break
            factor = 5.0 if ratio == 0 else min(5.0, 0.9 * ratio ** (-0.2))
        else:
            n_rej += 1
            factor = max(0.2, 0.9 * ratio ** (-0.2))
        h *= factor
    else:
        status, message = "max_steps", f"stopped after {max_steps} steps at t = {t!r}"
    return Solution(
        np.array(ts),
        np.array(ys),
        np.array(fs),
        status,
        rtol,
        atol,
        n_steps=len(ts) - 1,
        n_rejected=n_rej,
        n_fev=nfev,
        message=message,
    )
