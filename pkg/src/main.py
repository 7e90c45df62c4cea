#!/usr/bin/env python3
"""Kinetic regularity verifier - Main entry point."""

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from src import __version__
from src.checks import CHECKS, get_check_names
from src.config import ConfigError, ExperimentConfig, load_config
from src.kernels import BumpSpec
from src.schema import CSV_COLUMNS, VerificationReport, failed_report, format_number
from src.util.quadrature import describe_r_schedule

logger = logging.getLogger(__name__)

RESULTS_CSV = "results.csv"
SUMMARY_JSON = "summary.json"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--grid", help="grid points per axis")
    common.add_argument("--tau", help="comma-separated mollification scales")
    common.add_argument("--lambda", dest="lambdas", help="comma-separated dilation factors")
    common.add_argument("--p", help="integrability exponent; q follows from 1/q = 1/p + 1/6")
    common.add_argument("--out", help="output directory for results.csv and summary.json")
    common.add_argument("--quick", action="store_true", default=None, help="reduced-resolution smoke profile")
    common.add_argument("--workers", help="check families run in parallel")
    common.add_argument("--seed", help="random seed for sampled checks")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Numerical verification of kinetic transfer-of-regularity estimates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in get_check_names():
        sub.add_parser(name, parents=[common], help=f"run the {name} checks")
    sub.add_parser("all", parents=[common], help="run every check family")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "experiment": args.command,
        "grid": args.grid,
        "taus": args.tau,
        "lambdas": args.lambdas,
        "p": args.p,
        "out_dir": args.out,
        "quick": args.quick,
        "workers": args.workers,
        "seed": args.seed,
    }
    try:
        return load_config(args.config, overrides=overrides)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e


def run_family(name: str, cfg: ExperimentConfig) -> list[VerificationReport]:
    """Run one check family; an exception becomes a single failing report."""
    try:
        return CHECKS[name](cfg)
    except Exception as e:
        logger.exception("check family %s raised", name)
        return [failed_report(name, "run", e)]


def run_families(names: Sequence[str], cfg: ExperimentConfig) -> list[tuple[str, list[VerificationReport]]]:
    """Run families in order, fanning out to worker processes when configured."""
    if cfg.workers > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(names))) as pool:
            results = list(pool.map(run_family, names, [cfg] * len(names)))
        return list(zip(names, results))
    return [(name, run_family(name, cfg)) for name in names]


def print_family(name: str, reports: list[VerificationReport]) -> None:
    print(f"Running {name}...")
    for report in reports:
        if report.passed:
            print(f"  OK {report.check}")
        else:
            detail = report.note or f"measured {format_number(report.measured)}, target {format_number(report.target)}"
            print(f"  FAIL {report.check}: {detail}")


def write_results(out_dir: Path, reports: list[VerificationReport], cfg: ExperimentConfig) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / RESULTS_CSV, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for report in reports:
            writer.writerow(report.to_csv_dict())

    failures = [r for r in reports if not r.passed]
    summary = {
        "version": __version__,
        "total": len(reports),
        "passed": len(reports) - len(failures),
        "failed": len(failures),
        "failures": [r.to_json_dict() for r in failures],
        "config": cfg.describe(),
        "bump": BumpSpec.standard(1).describe(),
        "r_schedule": [describe_r_schedule(tau, cfg.r_nodes) for tau in cfg.taus],
    }
    with open(out_dir / SUMMARY_JSON, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)


def print_summary(results: list[tuple[str, list[VerificationReport]]]) -> None:
    print("\n" + "=" * 40)
    print(f"{'Family':<22}{'Passed':>8}{'Failed':>8}")
    print("-" * 40)
    for name, reports in results:
        failed = sum(not r.passed for r in reports)
        print(f"{name:<22}{len(reports) - failed:>8}{failed:>8}")
    print("=" * 40)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        cfg = config_from_args(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

    names = get_check_names() if args.command == "all" else [args.command]
    results = run_families(names, cfg)
    for name, reports in results:
        print_family(name, reports)

    reports = [r for _, family in results for r in family]
    out_dir = Path(cfg.out_dir)
    write_results(out_dir, reports, cfg)
    print_summary(results)
    print(f"Wrote {out_dir / RESULTS_CSV} and {out_dir / SUMMARY_JSON}")
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
