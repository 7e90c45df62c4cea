"""Kinetic group law, dilations, quasi-norm constants and ball volumes."""

import math

import numpy as np

from src.config import ExperimentConfig
from src.kinetic_group import (
    Dimension,
    PhasePoint,
    compose,
    dilate,
    inverse,
    kinetic_ball_volume,
    measure_quasi_constants,
    random_points,
    rho_box,
)
from src.schema import VerificationReport, bounded_report, closeness_report

EXPERIMENT = "group"


def _point_error(a: PhasePoint, b: PhasePoint) -> float:
    return float(np.max(np.abs(a.as_array() - b.as_array())))


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    rng = np.random.default_rng(cfg.seed)
    samples = 2_000 if cfg.quick else 10_000
    z1, z2, z3 = (random_points(rng, samples) for _ in range(3))

    left = compose(compose(z1, z2), z3)
    right = compose(z1, compose(z2, z3))
    scale = 1.0 + float(np.max(np.abs(left.as_array())))
    identity = float(np.max(np.abs(compose(z1, inverse(z1)).as_array())))
    reports = [
        bounded_report(EXPERIMENT, "associativity", _point_error(left, right) / scale, 1e-14, {"samples": samples}),
        bounded_report(EXPERIMENT, "inverse_axiom", identity / scale, 1e-14, {"samples": samples}),
        bounded_report(
            EXPERIMENT, "composition_example",
            _point_error(compose(PhasePoint.of(1, 2, 3), PhasePoint.of(0.5, 1, -1)), PhasePoint.of(1.5, 4.5, 2)),
            0.0,
        ),
    ]

    r = 1.7
    auto = _point_error(dilate(r, compose(z1, z2)), compose(dilate(r, z1), dilate(r, z2)))
    reports.append(bounded_report(EXPERIMENT, "dilation_automorphism", auto / (r**3 * scale), 1e-14, {"r": r}))
    homog = float(np.max(np.abs(rho_box(dilate(3.0, z1)) - 3.0 * rho_box(z1)) / rho_box(z1)))
    reports.append(bounded_report(EXPERIMENT, "rho_box_homogeneity", homog, 1e-12, {"r": 3.0}))

    constants = measure_quasi_constants(samples, seed=cfg.seed)
    params = {"samples": constants.samples, "radius": 10.0}
    reports.append(bounded_report(EXPERIMENT, "quasi_triangle_constant", constants.triangle, math.inf, params,
                                  note="measured; no magnitude asserted"))
    reports.append(bounded_report(EXPERIMENT, "inverse_constant", constants.inverse, math.inf, params,
                                  note="measured; no magnitude asserted"))

    dim = Dimension(1)
    reports.append(closeness_report(EXPERIMENT, "ball_volume_unit", kinetic_ball_volume(1.0, dim), 8.0, 1e-12))
    for radius in (0.5, 2.0, 4.0):
        reports.append(closeness_report(
            EXPERIMENT, "ball_volume_homogeneity",
            kinetic_ball_volume(radius, dim) / radius**dim.Q, kinetic_ball_volume(1.0, dim), 1e-12,
            {"r": radius}, relative=True,
        ))
    return reports
