"""Random analytic test metrics (near-identity, positive definite on a box)."""

from __future__ import annotations

import numpy as np

from .metric import MetricField

DEFAULT_COORDS = ("x", "y", "z", "u", "v", "w")


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _random_term(rng: np.random.Generator, coords) -> str:
    kind = rng.integers(3)
    lin = " + ".join(f"{_fmt(rng.uniform(-1.5, 1.5))}*{c}" for c in coords)
    phase = _fmt(rng.uniform(-np.pi, np.pi))
    if kind == 0:
        return f"sin({lin} + {phase})"
    if kind == 1:
        return f"cos({lin} + {phase})"
    return f"tanh({lin} + {phase})"


def random_metric(
    n: int = 3,
    seed: int | np.random.Generator = 0,
    amplitude: float = 0.12,
    coords=None,
) -> MetricField:
    """A metric ``delta_ij + amplitude * (bounded analytic terms)``.

    Each entry is a bounded combination of trig/tanh terms of size at most
    ``amplitude``, so Gershgorin keeps the matrix positive definite whenever
    ``n * amplitude < 1``.
    """
    if n * amplitude >= 1:
        raise ValueError("n * amplitude must stay below 1 to guarantee positivity")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    coords = tuple(coords or DEFAULT_COORDS[:n])
    matrix = [["0"] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            w1, w2 = rng.uniform(-1, 1, size=2) * amplitude / 2
            entry = f"{_fmt(w1)}*{_random_term(rng, coords)} + {_fmt(w2)}*{_random_term(rng, coords)}"
            if i == j:
                entry = f"1 + {entry}"
            matrix[i][j] = matrix[j][i] = entry
    return MetricField.from_strings(coords, matrix)
