"""Balancing of the multiplicative bound over the dilation parameter."""

import math

from src.config import ExperimentConfig
from src.estimator import (
    CorollaryInputs,
    balance_check,
    balance_lambda,
    corollary_check,
    d_branch_exponents,
    symmetric_balance_check,
)
from src.schema import VerificationReport, bounded_report

EXPERIMENT = "balance"


def _edge_reports() -> list[VerificationReport]:
    no_velocity = balance_lambda(CorollaryInputs(0.0, 0.0, 2.0, 3.0))
    no_sources = balance_lambda(CorollaryInputs(0.0, 2.0, 0.0, 0.0))
    pair = d_branch_exponents(1)
    return [
        bounded_report(EXPERIMENT, "zero_velocity_gradient", no_velocity.objective, 0.0, {"branch": no_velocity.branch}),
        bounded_report(EXPERIMENT, "zero_sources", no_sources.objective, 0.0,
                       {"branch": no_sources.branch, "lam": "inf" if math.isinf(no_sources.lam) else no_sources.lam}),
        bounded_report(EXPERIMENT, "d_branch_exponents", max(abs(pair[0] - 0.5), abs(pair[1] - 0.5)), 1e-15),
    ]


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    reports = balance_check(seed=cfg.seed)
    reports.append(symmetric_balance_check())
    reports.extend(_edge_reports())
    reports.extend(corollary_check(cfg))
    return reports
