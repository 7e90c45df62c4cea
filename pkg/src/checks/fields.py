"""Norms, differences, Young ratios, fractional derivatives and Littlewood-Paley shells."""

import math

import numpy as np

from src.config import ExperimentConfig
from src.field_calculus.convolution import young_check
from src.field_calculus.fields import (
    AnalyticField,
    GridField,
    GridSpec,
    constant_field,
    delta_x_h,
    gaussian_field,
    linear_x_field,
    lp_norm,
)
from src.field_calculus.singular import calibrate_singular_constant, commute_check
from src.field_calculus.spectral import (
    LP_BAND_LIMIT,
    LPBank,
    frac_dx,
    lp_equivalence_band,
    lp_project,
    partition_defect,
    psi_j_identity_check,
    psi_l1_band,
    reconstruction_error,
    triple_frac_check,
)
from src.kernels import KernelId
from src.schema import VerificationReport, bounded_report, closeness_report

EXPERIMENT = "fields"

# (p, q, theta) with 1/q + 1 = 1/theta + 1/p.
YOUNG_TRIPLES = ((1.0, 1.0, 1.0), (2.0, 2.0, 1.0), (math.inf, math.inf, 1.0), (2.0, math.inf, 2.0))


def _sine_field(k: float) -> AnalyticField:
    return AnalyticField(lambda z: np.sin(k * z.x[..., 0]) + 0.0 * z.t, name=f"sin({k:g}x)")


def _norm_reports() -> list[VerificationReport]:
    grid = GridSpec.cube(64, 8.0)
    gauss = gaussian_field(0.0)
    reports = [
        closeness_report(EXPERIMENT, "gaussian_l2_norm", lp_norm(grid.sample(gauss), 2.0), math.pi**0.75, 1e-2,
                         grid.describe(), relative=True),
        bounded_report(EXPERIMENT, "zero_field_norm", lp_norm(GridField(grid, np.zeros(grid.shape)), 2.0), 0.0),
    ]
    h = grid.spacing[1]
    dx_norm = math.sqrt(math.pi**1.5 / 2.0)
    reports.append(closeness_report(
        EXPERIMENT, "difference_quotient_limit", lp_norm(delta_x_h(gauss, h, grid), 2.0) / h, dx_norm, 1e-2,
        {"h": h}, relative=True,
    ))
    reports.append(bounded_report(EXPERIMENT, "zero_shift", lp_norm(delta_x_h(gauss, 0.0, grid), 2.0), 0.0))

    small = GridSpec.cube(8, 2.0)
    moved = delta_x_h(small.sample(linear_x_field(0.7)), 2.0 * small.spacing[1])
    # The last two x-columns are shifted in from outside the box.
    interior = moved.samples[:, :-2]
    reports.append(bounded_report(
        EXPERIMENT, "linear_field_difference", float(np.max(np.abs(interior - 0.7 * 2.0 * small.spacing[1]))), 1e-12,
    ))
    return reports


def _young_reports(cfg: ExperimentConfig) -> list[VerificationReport]:
    n = 10 if cfg.quick else 16
    grid = GridSpec.cube(n, cfg.half_width)
    kid = KernelId.mollifier(1.0)
    return [
        young_check(kid, gaussian_field(0.0), grid, p, q, theta, quad_nodes=12 if cfg.quick else 16)
        for p, q, theta in YOUNG_TRIPLES
    ]


def _spectral_reports(cfg: ExperimentConfig) -> list[VerificationReport]:
    grid = cfg.spectral_grid().with_counts((8, cfg.spectral_grid().shape[1], 8))
    gauss = grid.sample(gaussian_field(0.0))
    reports = [triple_frac_check(gauss)]

    constant = frac_dx(grid.sample(constant_field(2.5)))
    reports.append(bounded_report(EXPERIMENT, "frac_of_constant", float(np.max(np.abs(constant.samples))), 1e-12))

    periodic = GridSpec((1.0, math.pi, 1.0), (4, 64, 4))
    wave = periodic.sample(_sine_field(8.0))
    err = float(np.max(np.abs(frac_dx(wave).samples - 2.0 * wave.samples)))
    reports.append(bounded_report(EXPERIMENT, "plane_wave_multiplier", err, 1e-10, {"k": 8}))

    bank = LPBank.for_grid(grid)
    rng = np.random.default_rng(cfg.seed)
    noise = GridField(grid, rng.standard_normal(grid.shape))
    reports.append(bounded_report(EXPERIMENT, "lp_reconstruction", reconstruction_error(noise, bank), 1e-10,
                                  bank.describe()))
    reports.append(bounded_report(EXPERIMENT, "lp_partition", partition_defect(grid, bank), 1e-10, bank.describe()))
    middle = (bank.j_min + bank.j_max) // 2
    for j in (middle - 1, middle, middle + 1):
        reports.append(psi_j_identity_check(noise, j, bank))
    projected = lp_project(noise, middle, bank)
    widened = lp_project(projected, middle, bank, widened=True)
    reports.append(bounded_report(
        EXPERIMENT, "widened_projection_identity",
        float(np.max(np.abs(widened.samples - projected.samples))) / float(np.max(np.abs(projected.samples))),
        1e-10, {"j": middle},
    ))
    band, norms = psi_l1_band(grid, bank)
    reports.append(bounded_report(EXPERIMENT, "psi_l1_band", band, 2.0,
                                  {"shells": sorted(norms), "l1": max(norms.values())}))
    family = [grid.sample(gaussian_field(k)) for k in (0.0, 1.0, 2.0, 4.0)]
    lp_band, _ = lp_equivalence_band(family)
    reports.append(bounded_report(EXPERIMENT, "square_function_band", lp_band, LP_BAND_LIMIT))
    return reports


def _singular_reports(cfg: ExperimentConfig) -> list[VerificationReport]:
    calibration = calibrate_singular_constant()
    reports = [
        closeness_report(EXPERIMENT, "singular_constant", calibration.constant, calibration.closed_form, 1e-2,
                         calibration.describe(), relative=True),
        bounded_report(EXPERIMENT, "backend_agreement", calibration.backend_agreement, 1e-3, calibration.describe()),
    ]
    nodes = 12 if cfg.quick else cfg.kernel_nodes
    line_points = 128 if cfg.quick else 256
    kid = KernelId.mollifier(1.0)
    lines = {"line_count": 4 if cfg.quick else 12, "seed": cfg.seed, "samples": 16 if cfg.quick else 32}
    reports.append(commute_check(kid, gaussian_field(0.0), nodes=nodes, line_points=line_points, **lines))
    reports.append(commute_check(kid, constant_field(1.0), nodes=nodes, line_points=line_points, **lines))
    return reports


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    reports = _norm_reports()
    reports.extend(_young_reports(cfg))
    reports.extend(_spectral_reports(cfg))
    reports.extend(_singular_reports(cfg))
    return reports
