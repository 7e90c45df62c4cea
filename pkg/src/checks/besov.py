"""Besov ratio sweep over anisotropic dilations, with the endpoint exponent observed."""

from src.config import ExperimentConfig
from src.estimator import critical_exponent, run_besov_experiment
from src.schema import VerificationReport


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    reports = run_besov_experiment(cfg)
    endpoint = critical_exponent()
    if abs(cfg.p - endpoint) > 1e-12:
        reports.extend(run_besov_experiment(cfg, p=endpoint, observational=True))
    return reports
