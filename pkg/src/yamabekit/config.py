"""TOML job configuration: schema checks with key paths in every error."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .expr import ExprError, parse
from .geometry import AsymmetricMetricError, GeometryError, MetricField
from .sampling import sample_points
from .soliton import KINDS, SolitonSpec, kind_of

MODES = ("curvature", "verify", "profile", "classify", "report")
FORMATS = ("csv", "json", "markdown", "svg")

DEFAULT_TOLERANCES = {
    "gate": 1e-8,
    "identity": 1e-8,
    "product_scalar": 1e-10,
    "divb": 1e-5,
    "m2": 1e-6,
    "ddiv": 1e-4,
    "classify": 1e-6,
    "r2": 1e-5,
    "c_drift": 1e-6,
    "key3": 1e-9,
    "two_way": 1e-9,
    "rtol": 1e-10,
    "atol": 1e-12,
}
# integrator tolerances are not acceptance thresholds and ignore --tol-scale
_UNSCALED = ("rtol", "atol")

_TOP_KEYS = {
    "name", "mode", "chart", "metric", "soliton", "product", "random",
    "profile", "sampling", "tolerances", "output", "expect",
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, path, key: str, message: str):
        self.path = str(path)
        self.key = key
        super().__init__(f"{self.path}: [{key}] {message}")


@dataclass(frozen=True)
class Sampling:
    count: int = 16
    seed: int = 0
    margin: float = 0.05


@dataclass(frozen=True)
class ProfileConfig:
    n: int
    fiber_scalar: float
    rho: float
    r_end: float
    ic: Optional[tuple[float, float, float]] = None
    origin_start: bool = False
    eps: float = 1e-2


@dataclass(frozen=True)
class RandomBattery:
    metrics: int = 8
    n: int = 3
    amplitude: float = 0.12


@dataclass(frozen=True)
class JobConfig:
    path: str
    name: str
    mode: Optional[str] = None
    metric: Optional[MetricField] = None
    box: Optional[tuple[tuple[float, float], ...]] = None
    soliton: Optional[SolitonSpec] = None
    product: Optional[dict] = None
    random: Optional[RandomBattery] = None
    profile: Optional[ProfileConfig] = None
    sampling: Sampling = Sampling()
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out_dir: Optional[str] = None
    formats: tuple[str, ...] = ()
    expect: dict = field(default_factory=dict)

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(self.path, key, message)

    def with_overrides(self, seed=None, tol_scale=None) -> "JobConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, sampling=replace(cfg.sampling, seed=int(seed)))
        if tol_scale is not None:
            tols = {k: (v if k in _UNSCALED else v * tol_scale) for k, v in cfg.tolerances.items()}
            cfg = replace(cfg, tolerances=tols)
        return cfg


class _Reader:
    def __init__(self, path):
        self.path = path

    def fail(self, key, message):
        raise ConfigError(self.path, key, message)

    def table(self, data, key) -> dict:
        v = data.get(key.rsplit(".", 1)[-1])
        if v is None:
            return {}
        if not isinstance(v, dict):
            self.fail(key, f"expected a table, got {type(v).__name__}")
        return v

    def check_keys(self, table: dict, prefix: str, allowed):
        for k in table:
            if k not in allowed:
                self.fail(f"{prefix}.{k}" if prefix else k, f"unknown key (allowed: {', '.join(sorted(allowed))})")

    def number(self, table, key, prefix, default=None, positive=False, required=False):
        full = f"{prefix}.{key}"
        if key not in table:
            if required:
                self.fail(full, "missing required key")
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(full, f"expected a finite number, got {v!r}")
        if positive and not v > 0:
            self.fail(full, f"must be positive, got {v!r}")
        return float(v)

    def integer(self, table, key, prefix, default=None, minimum=None):
        full = f"{prefix}.{key}"
        if key not in table:
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(full, f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(full, f"must be >= {minimum}, got {v}")
        return v

    def string(self, table, key, prefix, default=None, required=False):
        full = f"{prefix}.{key}" if prefix else key
        if key not in table:
            if required:
                self.fail(full, "missing required key")
            return default
        v = table[key]
        if not isinstance(v, str):
            self.fail(full, f"expected a string, got {v!r}")
        return v

    def params(self, table, prefix) -> dict:
        raw = table.get("params", {})
        if not isinstance(raw, dict):
            self.fail(f"{prefix}.params", "expected a table of numbers")
        out = {}
        for k, v in raw.items():
            out[k] = self.number(raw, k, f"{prefix}.params")
        return out


def _box(r: _Reader, raw, key, n=None):
    if not isinstance(raw, list) or not raw:
        r.fail(key, "expected a list of [low, high] pairs")
    out = []
    for i, pair in enumerate(raw):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pair)
            or not pair[0] < pair[1]
        ):
            r.fail(f"{key}[{i}]", f"expected [low, high] with low < high, got {pair!r}")
        out.append((float(pair[0]), float(pair[1])))
    if n is not None and len(out) != n:
        r.fail(key, f"box has {len(out)} intervals for {n} coordinates")
    return tuple(out)


def _metric(r: _Reader, chart: dict, mt: dict, sampling: Sampling):
    r.check_keys(chart, "chart", {"coords", "box"})
    r.check_keys(mt, "metric", {"components", "diagonal", "params"})
    coords = chart.get("coords")
    if not isinstance(coords, list) or not all(isinstance(c, str) for c in coords) or len(coords) < 2:
        r.fail("chart.coords", "expected a list of at least two coordinate names")
    if len(set(coords)) != len(coords):
        r.fail("chart.coords", f"duplicate coordinate names in {coords}")
    n = len(coords)
    if "box" not in chart:
        r.fail("chart.box", "missing required key")
    box = _box(r, chart["box"], "chart.box", n)
    params = r.params(mt, "metric")
    clash = set(params) & set(coords)
    if clash:
        r.fail("metric.params", f"parameters shadow coordinates: {sorted(clash)}")
    declared = list(coords) + list(params)
    if ("components" in mt) == ("diagonal" in mt):
        r.fail("metric", "give exactly one of 'components' or 'diagonal'")
    if "diagonal" in mt:
        diag = mt["diagonal"]
        if not isinstance(diag, list) or len(diag) != n:
            r.fail("metric.diagonal", f"expected {n} expression strings")
        matrix = [[diag[i] if i == j else "0" for j in range(n)] for i in range(n)]
        base = "metric.diagonal"
    else:
        matrix = mt["components"]
        if not isinstance(matrix, list) or len(matrix) != n or any(
            not isinstance(row, list) or len(row) != n for row in matrix
        ):
            r.fail("metric.components", f"expected a {n}x{n} matrix of expression strings")
        base = "metric.components"
    comps = []
    for i, row in enumerate(matrix):
        out_row = []
        for j, s in enumerate(row):
            key = f"{base}[{i}]" if base == "metric.diagonal" else f"{base}[{i}][{j}]"
            if isinstance(s, (int, float)) and not isinstance(s, bool):
                s = repr(float(s))
            if not isinstance(s, str):
                r.fail(key, f"expected an expression string, got {s!r}")
            try:
                out_row.append(parse(s, declared))
            except ExprError as exc:
                r.fail(key, str(exc))
        comps.append(tuple(out_row))
    try:
        metric = MetricField(tuple(coords), tuple(comps), params)
    except GeometryError as exc:
        r.fail(base, str(exc))
    pts = sample_points(box, max(sampling.count, 4), sampling.seed, sampling.margin)
    try:
        metric.check_symmetric(pts)
    except AsymmetricMetricError as exc:
        i, j = exc.key if hasattr(exc, "key") else (None, None)
        r.fail(f"{base}[{i}][{j}]", f"metric is not symmetric: {exc}")
    return metric, box


def load_config(path) -> JobConfig:
    """Read and validate a job file; raises :class:`ConfigError`."""
    path = Path(path)
    r = _Reader(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        r.fail("<file>", f"cannot read config: {exc.strerror or exc}")
    try:
        data = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        r.fail("<toml>", f"parse error: {exc}")
    r.check_keys(data, "", _TOP_KEYS)

    name = r.string(data, "name", "", default=path.stem)
    mode = r.string(data, "mode", "")
    if mode is not None and mode not in MODES:
        r.fail("mode", f"unknown mode {mode!r} (expected one of {', '.join(MODES)})")

    smp = r.table(data, "sampling")
    r.check_keys(smp, "sampling", {"count", "seed", "margin"})
    sampling = Sampling(
        count=r.integer(smp, "count", "sampling", 16, minimum=0),
        seed=r.integer(smp, "seed", "sampling", 0, minimum=0),
        margin=r.number(smp, "margin", "sampling", 0.05),
    )
    if not 0 <= sampling.margin < 0.5:
        r.fail("sampling.margin", f"must lie in [0, 0.5), got {sampling.margin}")

    tol_t = r.table(data, "tolerances")
    r.check_keys(tol_t, "tolerances", set(DEFAULT_TOLERANCES))
    tolerances = dict(DEFAULT_TOLERANCES)
    for k in tol_t:
        tolerances[k] = r.number(tol_t, k, "tolerances", positive=True)

    metric = box = soliton = None
    chart, mt = r.table(data, "chart"), r.table(data, "metric")
    if chart or mt:
        if not chart:
            r.fail("chart", "a metric needs a [chart] table")
        if not mt:
            r.fail("metric", "a chart needs a [metric] table")
        metric, box = _metric(r, chart, mt, sampling)

    sol = r.table(data, "soliton")
    if sol:
        r.check_keys(sol, "soliton", {"potential", "rho", "kind"})
        if metric is None:
            r.fail("soliton", "a soliton needs [chart] and [metric] tables")
        pot = r.string(sol, "potential", "soliton", required=True)
        rho = r.number(sol, "rho", "soliton", required=True)
        kind = r.string(sol, "kind", "soliton")
        if kind is not None and kind not in KINDS:
            r.fail("soliton.kind", f"unknown kind {kind!r} (expected one of {', '.join(KINDS)})")
        if kind is not None and kind != kind_of(rho):
            r.fail("soliton.kind", f"kind {kind!r} does not match rho = {rho!r}")
        try:
            expr = parse(pot, list(metric.coords) + list(metric.params))
        except ExprError as exc:
            r.fail("soliton.potential", str(exc))
        soliton = SolitonSpec(metric.with_potential(expr), expr, rho, kind, box)

    product = None
    pr = r.table(data, "product")
    if pr:
        r.check_keys(pr, "product", {"kind", "a", "rho"})
        if metric is not None:
            r.fail("product", "give either [product] or [chart]/[metric], not both")
        kind = r.string(pr, "kind", "product", required=True)
        if kind not in ("shrinking", "expanding"):
            r.fail("product.kind", f"expected 'shrinking' or 'expanding', got {kind!r}")
        rho = r.number(pr, "rho", "product", required=True)
        if kind_of(rho) != kind:
            r.fail("product.rho", f"{kind} products need rho {'> 0' if kind == 'shrinking' else '< 0'}, got {rho!r}")
        product = {"kind": kind, "a": r.number(pr, "a", "product", 1.0, positive=True), "rho": rho}

    rnd = None
    rt = r.table(data, "random")
    if rt:
        r.check_keys(rt, "random", {"metrics", "n", "amplitude"})
        rnd = RandomBattery(
            metrics=r.integer(rt, "metrics", "random", 8, minimum=0),
            n=r.integer(rt, "n", "random", 3, minimum=2),
            amplitude=r.number(rt, "amplitude", "random", 0.12, positive=True),
        )
        if rnd.n * rnd.amplitude >= 1:
            r.fail("random.amplitude", "n * amplitude must stay below 1")

    profile = None
    pt = r.table(data, "profile")
    if pt:
        profile = _profile(r, pt)

    out = r.table(data, "output")
    r.check_keys(out, "output", {"dir", "formats"})
    out_dir = r.string(out, "dir", "output")
    formats = out.get("formats", [])
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        r.fail("output.formats", f"expected a list drawn from {', '.join(FORMATS)}, got {formats!r}")

    expect = r.table(data, "expect")
    r.check_keys(expect, "expect", {"label", "exit_code"})

    return JobConfig(
        path=str(path),
        name=name,
        mode=mode,
        metric=metric,
        box=box,
        soliton=soliton,
        product=product,
        random=rnd,
        profile=profile,
        sampling=sampling,
        tolerances=tolerances,
        out_dir=out_dir,
        formats=tuple(formats),
        expect=dict(expect),
    )


def _profile(r: _Reader, pt: dict) -> ProfileConfig:
    r.check_keys(pt, "profile", {"n", "fiber_scalar", "rho", "r_end", "ic", "origin_start", "eps"})
    n = r.integer(pt, "n", "profile", 3, minimum=3)
    rho = r.number(pt, "rho", "profile", required=True)
    r_end = r.number(pt, "r_end", "profile", required=True)
    origin = pt.get("origin_start", False)
    if not isinstance(origin, bool):
        r.fail("profile.origin_start", f"expected true or false, got {origin!r}")
    eps = r.number(pt, "eps", "profile", 1e-2, positive=True)
    default_rbar = float((n - 1) * (n - 2)) if origin else None
    rbar = r.number(pt, "fiber_scalar", "profile", default_rbar, required=not origin)
    ic = None
    if origin:
        if "ic" in pt:
            r.fail("profile.ic", "give either 'ic' or 'origin_start = true', not both")
        if not math.isclose(rbar, (n - 1) * (n - 2), rel_tol=1e-12, abs_tol=1e-12):
            r.fail("profile.fiber_scalar", f"origin start needs the unit round sphere fiber ({(n - 1) * (n - 2)}), got {rbar!r}")
        if not r_end > eps:
            r.fail("profile.r_end", f"must exceed eps = {eps!r}")
    else:
        raw = pt.get("ic")
        if not isinstance(raw, dict):
            r.fail("profile.ic", "profile mode needs initial conditions {r, phi, dphi} or origin_start = true")
        r.check_keys(raw, "profile.ic", {"r", "phi", "dphi"})
        ic = tuple(r.number(raw, k, "profile.ic", required=True) for k in ("r", "phi", "dphi"))
        if not ic[1] > 0:
            r.fail("profile.ic.phi", f"must be positive, got {ic[1]!r}")
        if not r_end > ic[0]:
            r.fail("profile.r_end", f"must exceed the initial radius {ic[0]!r}")
    return ProfileConfig(n, rbar, rho, r_end, ic, origin, eps)


def config_points(cfg: JobConfig, box) -> np.ndarray:
    s = cfg.sampling
    if s.count == 0:
        return np.zeros((0, len(box)))
    return sample_points(box, s.count, s.seed, s.margin)
