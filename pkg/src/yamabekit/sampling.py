"""Reproducible quasi-random sample points inside a chart box."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc


def sample_points(box, count: int = 64, seed: int = 0, margin: float = 0.05) -> np.ndarray:
    """Scrambled Sobol points in ``box`` shrunk by ``margin`` (fraction per side).

    The margin keeps samples away from coordinate singularities sitting on
    the box boundary (poles of spherical charts, ``y = 0`` of half-planes).
    """
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise ValueError(f"box must be a list of [low, high] pairs, got {box.tolist()}")
    if not 0 <= margin < 0.5:
        raise ValueError("margin must lie in [0, 0.5)")
    width = box[:, 1] - box[:, 0]
    lo = box[:, 0] + margin * width
    hi = box[:, 1] - margin * width
    sampler = qmc.Sobol(d=len(box), scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(count, 1))))
    unit = sampler.random_base2(m)[:count]
    return qmc.scale(unit, lo, hi)
