"""Chart metrics and pointwise tensor values."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..expr import Expr, Jet, eval_jet, evaluate, parse, stack, symbols, to_source


class GeometryError(ValueError):
    pass


class SingularMetricError(GeometryError, ArithmeticError):
    """The metric matrix is not invertible at the requested point."""

    def __init__(self, point, cond):
        self.point = tuple(float(x) for x in point)
        self.cond = cond
        super().__init__(f"metric is singular at {self.point} (condition number {cond:.3g})")


class AsymmetricMetricError(GeometryError):
    def __init__(self, i, j, detail=""):
        self.key = (i, j)
        super().__init__(f"metric component g[{i}][{j}] differs from g[{j}][{i}]{detail}")


class DimensionError(GeometryError):
    pass


class NotPositiveDefiniteWarning(UserWarning):
    pass


COND_LIMIT = 1e14


@dataclass(frozen=True)
class MetricField:
    """A metric ``g_ij`` on a coordinate chart, given by expressions.

    ``components`` is the full n x n matrix.  Entries ``g_ij`` and ``g_ji``
    must be the same tree, or evaluate identically where checked with
    :meth:`check_symmetric`.
    """

    coords: tuple[str, ...]
    components: tuple[tuple[Expr, ...], ...]
    params: Mapping[str, float] = field(default_factory=dict)
    potential: Expr | None = None

    def __post_init__(self):
        n = len(self.coords)
        if n < 2:
            raise DimensionError("a chart needs at least two coordinates")
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise DimensionError(f"metric must be {n}x{n}")
        allowed = set(self.coords) | set(self.params)
        for row in self.components:
            for e in row:
                unknown = symbols(e) - allowed - {"pi", "e"}
                if unknown:
                    raise GeometryError(f"undeclared symbols {sorted(unknown)} in {to_source(e)!r}")

    @classmethod
    def from_strings(
        cls,
        coords: Sequence[str],
        matrix: Sequence[Sequence[str]],
        params: Mapping[str, float] | None = None,
        potential: str | None = None,
    ) -> "MetricField":
        params = dict(params or {})
        declared = list(coords) + list(params)
        comps = tuple(tuple(parse(str(s), declared) for s in row) for row in matrix)
        pot = parse(potential, declared) if potential is not None else None
        return cls(tuple(coords), comps, params, pot)

    @classmethod
    def diagonal(cls, coords, entries, params=None, potential=None) -> "MetricField":
        n = len(coords)
        matrix = [[entries[i] if i == j else "0" for j in range(n)] for i in range(n)]
        return cls.from_strings(coords, matrix, params, potential)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def with_potential(self, potential: str | Expr) -> "MetricField":
        if isinstance(potential, str):
            potential = parse(potential, list(self.coords) + list(self.params))
        return MetricField(self.coords, self.components, dict(self.params), potential)

    def asymmetric_entries(self) -> list[tuple[int, int]]:
        """Off-diagonal pairs whose trees differ (candidates for a numeric check)."""
        n = self.dim
        return [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if self.components[i][j] != self.components[j][i]
        ]

    def check_symmetric(self, points, tol: float = 1e-12) -> None:
        """Raise :class:`AsymmetricMetricError` unless ``g_ij == g_ji`` at ``points``."""
        for i, j in self.asymmetric_entries():
            for p in points:
                env = dict(self.params)
                env.update(zip(self.coords, p))
                a = evaluate(self.components[i][j], env)
                b = evaluate(self.components[j][i], env)
                if abs(a - b) > tol * max(1.0, abs(a), abs(b)):
                    raise AsymmetricMetricError(i, j, f" at {tuple(float(x) for x in p)}: {a!r} vs {b!r}")

    def expr_jet(self, e: Expr, point, order: int) -> Jet:
        return eval_jet(e, self.coords, point, self.params, order)

    def jet(self, point, order: int) -> Jet:
        """Jet of the metric matrix at ``point``, shape ``(n, n)``.

        Raises :class:`SingularMetricError` for a non-invertible matrix and
        warns with :class:`NotPositiveDefiniteWarning` for an indefinite one.
        """
        n = self.dim
        cache: dict[Expr, Jet] = {}
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                e = self.components[i][j]
                if e not in cache:
                    cache[e] = self.expr_jet(e, point, order)
                row.append(cache[e])
            rows.append(stack(row))
        g = stack(rows)
        g0 = g.value
        if not np.allclose(g0, g0.T, rtol=1e-12, atol=1e-12):
            i, j = np.unravel_index(np.argmax(np.abs(g0 - g0.T)), g0.shape)
            raise AsymmetricMetricError(int(i), int(j), f" at {tuple(float(x) for x in point)}")
        g = Jet(0.5 * (g.coeffs + np.swapaxes(g.coeffs, 0, 1)), g.dim, g.order, g.base)
        cond = np.linalg.cond(g0) if np.all(np.isfinite(g0)) else np.inf
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularMetricError(point, cond)
        if np.linalg.eigvalsh(g0).min() <= 0:
            warnings.warn(
                f"metric is not positive definite at {tuple(point)}",
                NotPositiveDefiniteWarning,
                stacklevel=2,
            )
        return g


@dataclass(frozen=True)
class TensorValue:
    """Components of a tensor at one point.

    ``variance`` holds one entry per slot, ``"d"`` for covariant (lower)
    and ``"u"`` for contravariant (upper).
    """

    point: tuple[float, ...]
    variance: str
    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        n = len(self.point)
        if comps.shape != (n,) * len(self.variance):
            raise DimensionError(
                f"shape {comps.shape} does not match rank {len(self.variance)} in dimension {n}"
            )

    @property
    def rank(self) -> int:
        return len(self.variance)

    def __getitem__(self, key):
        return self.components[key]

    def _move(self, slot: int, mat: np.ndarray, new: str) -> "TensorValue":
        comps = np.moveaxis(np.tensordot(mat, self.components, axes=([1], [slot])), 0, slot)
        variance = self.variance[:slot] + new + self.variance[slot + 1:]
        return TensorValue(self.point, variance, comps)

    def raise_index(self, slot: int, ginv: np.ndarray) -> "TensorValue":
        if self.variance[slot] != "d":
            raise GeometryError(f"slot {slot} is already contravariant")
        return self._move(slot, ginv, "u")

    def lower_index(self, slot: int, g: np.ndarray) -> "TensorValue":
        if self.variance[slot] != "u":
            raise GeometryError(f"slot {slot} is already covariant")
        return self._move(slot, g, "d")
