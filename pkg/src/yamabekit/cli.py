"""Command line front end.

Exit codes: 0 all checks within tolerance, 1 usage or configuration error,
2 tolerance violations, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Optional, Sequence

from .config import FORMATS, MODES, ConfigError, load_config
from .expr import DomainViolation, JetDomainError
from .geometry import GeometryError, NotPositiveDefiniteWarning, SingularMetricError
from .jobs import run_job
from .ode import IntegrationError, SingularStateError
from .report import EmptyResultsError, emit_report

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULT_FORMATS = {
    "curvature": ("json", "csv"),
    "verify": ("json", "csv", "markdown"),
    "profile": ("json", "csv", "svg"),
    "classify": ("json", "csv", "markdown"),
    "report": FORMATS,
}

NUMERICAL_ERRORS = (
    SingularMetricError,
    SingularStateError,
    IntegrationError,
    JetDomainError,
    DomainViolation,
    ArithmeticError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {s}")
    return v


def _order(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError(f"jet order must be >= 2, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="yamabekit", description="Curvature, soliton identity and profile ODE jobs.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="TOML job file")
    p.add_argument("--out", help="output directory (default: [output].dir or ./yamabekit-out)")
    p.add_argument("--seed", type=_seed, help="override the sampling seed")
    p.add_argument("--tol-scale", type=_positive_float, help="multiply every acceptance tolerance")
    p.add_argument("--jet-order", type=_order, default=4, help="jet truncation order (default 4)")
    p.add_argument("--slow", action="store_true", help="also run the order-6 double-divergence identity")
    p.add_argument("--format", action="append", choices=FORMATS, dest="formats", help="output format (repeatable)")
    p.add_argument("--quiet", action="store_true", help="suppress the summary")
    return p


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.tol_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    formats = args.formats or cfg.formats or DEFAULT_FORMATS[args.mode]
    out_dir = args.out or cfg.out_dir or "yamabekit-out"
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", NotPositiveDefiniteWarning)
            res = run_job(cfg, args.mode, args.jet_order, args.slow)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except NotPositiveDefiniteWarning as exc:
        print(f"numerical failure: {cfg.path}: [metric] {exc}", file=stderr)
        return EXIT_NUMERICAL
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {cfg.path}: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except GeometryError as exc:
        print(f"config error: {cfg.path}: [metric] {exc}", file=stderr)
        return EXIT_CONFIG
    try:
        written = emit_report(res, formats, out_dir)
    except EmptyResultsError as exc:
        print(f"config error: {cfg.path}: [sampling.count] {exc}", file=stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {cfg.path}: [output.dir] cannot write {out_dir!r}: {exc}", file=stderr)
        return EXIT_CONFIG
    if not args.quiet:
        for line in res.summary_lines():
            print(line, file=stdout)
        for path in written:
            print(f"  wrote {path}", file=stdout)
    if res.numerical_failure:
        return EXIT_NUMERICAL
    if res.violations:
        return EXIT_TOLERANCE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
