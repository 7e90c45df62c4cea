"""Log-log slopes of the corollary norms under anisotropic dilation."""

from src.config import ExperimentConfig
from src.defect_engine import make_gaussian_split, rescale_split
from src.estimator import corollary_inputs, run_scaling_experiment
from src.schema import VerificationReport, bounded_report

EXPERIMENT = "scaling"


def _identity_dilation(cfg: ExperimentConfig) -> VerificationReport:
    """lam = 1 reproduces the undilated norms."""
    split = make_gaussian_split("S0-generic")
    grid = cfg.spectral_grid()
    base = corollary_inputs(split, grid, cfg.p)
    same = corollary_inputs(rescale_split(split, 1.0), grid.dilated(1.0), cfg.p)
    gap = max(abs(a - b) for a, b in zip((base.A, base.B, base.C, base.D), (same.A, same.B, same.C, same.D)))
    return bounded_report(EXPERIMENT, "unit_dilation", gap, 0.0, {"p": cfg.p})


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    reports = run_scaling_experiment(cfg)
    reports.append(_identity_dilation(cfg))
    return reports
