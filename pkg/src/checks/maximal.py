"""Maximal operators, the fractional integral and the kernel dominations."""

import numpy as np

from src.config import ExperimentConfig
from src.field_calculus.fields import GridSpec, constant_field, gaussian_field, standard_family
from src.maximal_operators import (
    MaximalConfig,
    domination_check,
    fractional_integral_I1,
    homogeneity_check,
    kin1_vs_I1_check,
    l2_boundedness_check,
    maximal_kin,
    maximal_x,
    monotonicity_check,
    sample_points,
)
from src.schema import VerificationReport, bounded_report, closeness_report

EXPERIMENT = "maximal"


def _pointwise_reports(points, mcfg: MaximalConfig) -> list[VerificationReport]:
    const = constant_field(-2.0)
    gauss = gaussian_field(0.0)
    origin = points[:1]
    reports = [
        closeness_report(EXPERIMENT, "maximal_x_constant", float(maximal_x(const, origin, mcfg)[0]), 2.0, 1e-12),
        closeness_report(EXPERIMENT, "maximal_kin_constant", float(maximal_kin(const, origin, mcfg)[0]), 2.0, 1e-9),
        closeness_report(EXPERIMENT, "maximal_x_gaussian_origin", float(maximal_x(gauss, origin, mcfg)[0]), 1.0, 1e-2,
                         relative=True),
        bounded_report(EXPERIMENT, "I1_zero_field", float(np.max(np.abs(fractional_integral_I1(
            const.scaled(0.0), origin, mcfg)))), 0.0),
    ]
    values = np.abs(gauss(points))
    reports.append(bounded_report(
        EXPERIMENT, "maximal_kin_dominates_value",
        float(np.max((values - maximal_kin(gauss, points, mcfg)) / values)), 1e-2,
        {"points": int(values.size)},
    ))
    return reports


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    mcfg = MaximalConfig.quick() if cfg.quick else MaximalConfig()
    points = sample_points(4 if cfg.quick else 8, seed=cfg.seed)
    gauss = gaussian_field(0.0)

    reports = _pointwise_reports(points, mcfg)
    reports.extend(monotonicity_check(points, mcfg))
    reports.extend(homogeneity_check(gauss, points, mcfg))
    # The grid-wide sweep uses the quick discretization at every resolution.
    coarse = GridSpec.cube(6 if cfg.quick else 8, 3.0)
    reports.append(l2_boundedness_check(standard_family(), coarse, MaximalConfig.quick()))
    reports.append(kin1_vs_I1_check(gauss, points, mcfg))
    reports.extend(domination_check(gauss, points, mcfg, nodes=10 if cfg.quick else 16))
    return reports
