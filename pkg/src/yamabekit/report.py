"""Job results and their serialization to csv / json / markdown / svg.

All writers are deterministic: floats are written with ``repr``, keys are
sorted and no timestamps or absolute paths are embedded.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .ode import Classification, InvariantReport, ProfileTrajectory
from .soliton import IdentityReport


class EmptyResultsError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    section: str
    quantity: str
    value: Any
    tolerance: Optional[float]
    passed: bool

    def as_dict(self) -> dict:
        return {
            "section": self.section,
            "quantity": self.quantity,
            "value": _clean(self.value),
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class Results:
    name: str
    mode: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    identities: dict[str, IdentityReport] = field(default_factory=dict)
    curvature: list[dict] = field(default_factory=list)
    trajectory: Optional[ProfileTrajectory] = None
    invariants: Optional[InvariantReport] = None
    classification: Optional[Classification] = None
    numerical_failure: Optional[str] = None
    notes: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        has_ids = any(rep.points for rep in self.identities.values())
        return not (has_ids or self.curvature or (self.trajectory is not None and len(self.trajectory)))

    def check(self, section: str, quantity: str, value, tolerance: Optional[float], passed: Optional[bool] = None):
        if passed is None:
            passed = value is not None and value <= tolerance
        self.checks.append(Check(section, quantity, value, tolerance, bool(passed)))

    @property
    def violations(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "job": self.name,
            "mode": self.mode,
            "seed": self.seed,
            "checks": [c.as_dict() for c in self.checks],
            "notes": list(self.notes),
        }
        if self.numerical_failure:
            out["numerical_failure"] = self.numerical_failure
        if self.identities:
            out["identities"] = {k: json.loads(v.to_json()) for k, v in self.identities.items()}
        if self.curvature:
            out["curvature"] = self.curvature
        if self.trajectory is not None:
            out["trajectory"] = self.trajectory.to_dict()
        if self.invariants is not None:
            out["invariants"] = self.invariants.as_dict()
        if self.classification is not None:
            out["classification"] = self.classification.as_dict()
        return _clean(out)

    def summary_lines(self) -> list[str]:
        lines = [f"job {self.name} ({self.mode}, seed {self.seed})"]
        for c in self.checks:
            tol = "" if c.tolerance is None else f" <= {c.tolerance:.1e}"
            val = c.value if isinstance(c.value, (str, bool)) or c.value is None else f"{c.value:.3e}"
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.section}.{c.quantity} = {val}{tol}")
        if self.classification is not None:
            lines.append(f"  label: {self.classification.label}")
        if self.numerical_failure:
            lines.append(f"  numerical failure: {self.numerical_failure}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return lines


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


CURVATURE_COLUMNS = ("point", "R", "max_abs_ricci", "max_abs_riemann", "max_abs_weyl", "max_abs_cotton")


def _curvature_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = len(rows[0]["point"])
    w.writerow([f"x{i}" for i in range(dim)] + list(CURVATURE_COLUMNS[1:]))
    for row in rows:
        vals = [row["scalar"]]
        for key in ("ricci", "riemann", "weyl", "cotton"):
            v = row.get(key)
            vals.append(float(np.max(np.abs(v))) if v is not None else float("nan"))
        w.writerow([repr(float(x)) for x in row["point"]] + [repr(float(v)) for v in vals])
    return buf.getvalue()


def _checks_csv(checks: list[Check]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["section", "quantity", "value", "tolerance", "passed"])
    for c in checks:
        val = repr(float(c.value)) if isinstance(c.value, (int, float)) and not isinstance(c.value, bool) else str(c.value)
        tol = "" if c.tolerance is None else repr(float(c.tolerance))
        w.writerow([c.section, c.quantity, val, tol, "true" if c.passed else "false"])
    return buf.getvalue()


def to_markdown(res: Results) -> str:
    out = [f"# {res.name}: {res.mode}", "", f"Sampling seed: {res.seed}", ""]
    if res.classification is not None:
        out += [f"Classification: **{res.classification.label}**", ""]
    if res.numerical_failure:
        out += [f"Numerical failure: {res.numerical_failure}", ""]
    out += ["## Tolerances", "", "| check | value | tolerance | status |", "|---|---|---|---|"]
    for c in res.checks:
        if isinstance(c.value, (int, float)) and not isinstance(c.value, bool):
            val = f"{c.value:.3e}"
        else:
            val = str(c.value)
        tol = "-" if c.tolerance is None else f"{c.tolerance:.1e}"
        out.append(f"| {c.section}.{c.quantity} | {val} | {tol} | {'pass' if c.passed else 'FAIL'} |")
    out.append("")
    if res.trajectory is not None:
        t = res.trajectory
        md = t.metadata
        out += [
            "## Trajectory",
            "",
            f"- dimension {t.n}, fiber scalar curvature {t.fiber_scalar!r}, rho {t.rho!r}",
            f"- r in [{t.r[0]!r}, {t.r[-1]!r}], {len(t)} samples, status {t.status}",
            f"- {md.get('method')}: {md.get('steps')} steps, {md.get('rejected_steps')} rejected, "
            f"rtol {md.get('rtol')!r}, atol {md.get('atol')!r}",
            "",
        ]
    if res.notes:
        out += ["## Notes", ""] + [f"- {n}" for n in res.notes] + [""]
    return "\n".join(out)


def to_svg(t: ProfileTrajectory, width: int = 640, height: int = 400) -> str:
    """Polyline chart of ``R`` and ``c`` against ``r``."""
    series = [("R", t.R, "#1f77b4")]
    if np.any(np.isfinite(t.c)):
        series.append(("c", t.c, "#d62728"))
    r = t.r
    ys = np.concatenate([s[1][np.isfinite(s[1])] for s in series])
    lo, hi = float(ys.min()), float(ys.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 50
    sx = (width - 2 * pad) / (r[-1] - r[0]) if r[-1] > r[0] else 1.0

    def px(x):
        return pad + (x - r[0]) * sx

    def py(y):
        return height - pad - (y - lo) * (height - 2 * pad) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">r</text>',
        f'<text x="{pad - 4}" y="{pad:.1f}" text-anchor="end" font-size="10">{hi:.4g}</text>',
        f'<text x="{pad - 4}" y="{height - pad:.1f}" text-anchor="end" font-size="10">{lo:.4g}</text>',
        f'<text x="{pad}" y="{height - pad + 14}" text-anchor="middle" font-size="10">{r[0]:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 14}" text-anchor="middle" font-size="10">{r[-1]:.4g}</text>',
    ]
    for k, (label, y, color) in enumerate(series):
        mask = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(r[mask], y[mask]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(
            f'<text x="{width - pad - 4}" y="{pad + 14 * (k + 1)}" text-anchor="end" '
            f'font-size="12" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render(res: Results, fmt: str) -> dict[str, str]:
    """File suffix -> content for one format (possibly several CSV files)."""
    stem = f"{res.name}.{res.mode}"
    if fmt == "json":
        return {f"{stem}.json": json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n"}
    if fmt == "markdown":
        return {f"{stem}.md": to_markdown(res)}
    if fmt == "svg":
        if res.trajectory is None:
            return {}
        return {f"{stem}.svg": to_svg(res.trajectory)}
    if fmt == "csv":
        files = {f"{stem}.checks.csv": _checks_csv(res.checks)}
        for key, rep in res.identities.items():
            if rep.points:
                files[f"{stem}.{key}.csv"] = rep.to_csv()
        if res.curvature:
            files[f"{stem}.curvature.csv"] = _curvature_csv(res.curvature)
        if res.trajectory is not None:
            files[f"{stem}.trajectory.csv"] = res.trajectory.to_csv()
        return files
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(res: Results, formats, out_dir) -> list[Path]:
    """Write the requested formats under ``out_dir``; nothing is written for empty results."""
    if res.empty:
        raise EmptyResultsError(f"job {res.name!r} produced no results; nothing written")
    rendered: dict[str, str] = {}
    for fmt in formats:
        rendered.update(render(res, fmt))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fname in sorted(rendered):
        path = out / fname
        path.write_text(rendered[fname], encoding="utf-8", newline="\n")
        written.append(path)
    return written
