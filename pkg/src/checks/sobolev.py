"""Sobolev ratio sweep and the square-function band."""

from src.config import ExperimentConfig
from src.estimator import run_sobolev_experiment
from src.schema import VerificationReport


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    return run_sobolev_experiment(cfg)
