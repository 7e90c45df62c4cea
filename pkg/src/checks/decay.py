"""Decay of the mollified field's fractional x-derivative in tau and the Besov tail."""

from src.config import ExperimentConfig
from src.defect_engine import besov_tail, make_gaussian_split, mollifier_decay, mollified_frac_decay
from src.schema import VerificationReport


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    f = make_gaussian_split().f
    nodes, line_points = (16, 256) if cfg.quick else (24, 512)
    slope, kernel_norms = mollifier_decay(nodes=nodes, line_points=line_points)
    reports = [slope]
    reports.extend(mollified_frac_decay(
        f,
        kernel_norms=kernel_norms,
        nodes=nodes,
        line_points=line_points,
        field_nodes=10 if cfg.quick else 12,
        step_scale=1.5 if cfg.quick else 1.0,
    ))
    reports.append(besov_tail(f, taus=(1.0,) if cfg.quick else (0.5, 1.0)))
    return reports
