"""Command-line front end.

    interventions <experiment> [--config FILE] [--seed N] [--out DIR] [--param key=value]...

Exit status: 0 when every check passes, 2 when any check fails (the
report is still written), 1 on a usage or configuration error.  The
default output directory is ``$INTERVENTIONS_OUT/<experiment>``.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import OUT_ENV, resolve
from .errors import ConfigError, InterventionError
from .experiments import RUNNERS, SCHEMAS
from .report import Report

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


def _schema_epilog() -> str:
    lines = ["experiments and parameters (defaults):"]
    for name, schema in SCHEMAS.items():
        lines.append(f"  {name}")
        for key, prm in schema.items():
            default = ",".join(map(str, prm.default)) if isinstance(prm.default, tuple) else prm.default
            lines.append(f"      {key} = {default}" + (f"  ({prm.help})" if prm.help else ""))
    lines.append(f"\nenvironment: {OUT_ENV} sets the default output root")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interventions",
        description="Run a named measurement-and-control experiment and write report.json plus CSV tables.",
        epilog=_schema_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", nargs="?", choices=list(RUNNERS), help="experiment name (or set it in [run])")
    parser.add_argument("--config", type=Path, help="INI file with [run] and per-experiment sections")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="override one parameter")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def run(config) -> tuple[Report, dict]:
    report = Report(config.experiment, __version__, config.seed, dict(config.parameters))
    start = time.perf_counter()
    try:
        RUNNERS[config.experiment](config.parameters, config.seed, report)
    except InterventionError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
    timings = {"experiment": config.experiment, "wall_seconds": time.perf_counter() - start}
    return report, timings


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        config = resolve(args.experiment, SCHEMAS, args.config, args.seed, args.out, args.param)
    except ConfigError as exc:
        print(f"interventions: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report, timings = run(config)
    path = report.write(config.output_dir, timings)
    for check in report.failures():
        print(f"FAIL {check.name}" + (f": {check.detail}" if check.detail else ""), file=sys.stderr)
    if report.error:
        print(f"ERROR {report.error}", file=sys.stderr)
    n_pass = sum(c.passed for c in report.checks)
    print(f"{config.experiment}: {n_pass}/{len(report.checks)} checks passed; report at {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
