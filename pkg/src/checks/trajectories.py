"""(M1)-(M4) of the critical trajectory family."""

import numpy as np

from src.config import ExperimentConfig
from src.kinetic_group import PhasePoint, random_points
from src.schema import VerificationReport, bounded_report, closeness_report
from src.trajectories import (
    TrajectoryParams,
    block_apply,
    displacement_scaling_slope,
    endpoint,
    endpoint_inverse_params,
    endpoint_offset,
    mat_A,
    mat_A_inv,
    mat_D,
    mat_W,
    velocity_fd_residual,
    verify_M1,
    verify_M2,
    verify_M3,
    verify_M4,
)
from src.util.quadrature import dyadic_grid

EXPERIMENT = "trajectories"

M0_GRID = (-2.0, -1.5, -1.0)


def _random_params(rng: np.random.Generator, count: int) -> TrajectoryParams:
    m0 = rng.uniform(-2.0, -1.0, size=count)
    m1 = rng.uniform(-1.0, 1.0, size=(count, 1))
    m2 = rng.uniform(-1.0, 1.0, size=(count, 1))
    return TrajectoryParams.of(m0, m1, m2)


def _m1_reports(rng: np.random.Generator, count: int) -> list[VerificationReport]:
    """Order of the trajectory residual on random (m, r, z); the worst case is reported."""
    params = _random_params(rng, count)
    radii = rng.uniform(0.5, 2.0, size=count)
    z = random_points(rng, count, radius=2.0)
    reports = [
        verify_M1(TrajectoryParams.of(params.m0[i], params.m1[i], params.m2[i]), float(radii[i]), 0.02, z[i])
        for i in range(count)
    ]
    failing = [r for r in reports if not r.passed]
    if failing:
        worst = failing[0]
    else:
        worst = max(reports, key=lambda r: abs(r.measured - 4.0) if r.check == "M1_order" else 0.0)
    worst.parameters["samples"] = count
    return [worst]


def _inverse_identity(r_grid: np.ndarray) -> float:
    m0 = np.asarray(M0_GRID)[:, None]
    r = r_grid[None, :]
    A = mat_A(m0, r)
    inv = mat_A_inv(m0, r)
    prod = np.einsum("...ij,...jk->...ik", A, inv)
    return float(np.max(np.abs(prod - np.eye(2))))


def _conjugation_identity(r_grid: np.ndarray) -> float:
    """A_{m0}(r) = D_{m0} W(r) D_{m0}^-1, relative to the entry size."""
    m0 = np.asarray(M0_GRID)[:, None]
    A = mat_A(m0, r_grid[None, :])
    conj = mat_D(m0) @ mat_W(r_grid)[None] @ mat_D(1.0 / m0)
    return float(np.max(np.abs(conj - A) / (1.0 + np.abs(A))))


def _round_trip(rng: np.random.Generator, count: int, r: float) -> float:
    m = _random_params(rng, count)
    back = endpoint_inverse_params(r, endpoint_offset(m, r))
    return float(np.max(np.abs(back.as_array() - m.as_array()) / (1.0 + np.abs(m.as_array()))))


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    rng = np.random.default_rng(cfg.seed)
    count = 20 if cfg.quick else 50
    r_grid = dyadic_grid(-4, 4, 8 if cfg.quick else 64)

    reports = _m1_reports(rng, count)
    m0, r = np.meshgrid(np.asarray(M0_GRID), np.array([0.25, 0.5, 1.0, 2.0, 4.0]), indexing="ij")
    reports.append(verify_M2(m0, r))
    reports.extend(verify_M3(M0_GRID, r_grid))

    m = TrajectoryParams.of(-1.5, 0.7, -0.4)
    reports.append(verify_M4(m, r_grid))
    slope = displacement_scaling_slope(-1.5, r_grid)
    reports.append(closeness_report(EXPERIMENT, "M4_position_lag_slope", slope, 3.0, 0.05, {"m0": -1.5}))

    reports.append(bounded_report(EXPERIMENT, "A_conjugation", _conjugation_identity(r_grid), 1e-14))
    reports.append(bounded_report(EXPERIMENT, "A_times_inverse", _inverse_identity(dyadic_grid(-6, 6, 2)), 1e-12))
    reports.append(bounded_report(EXPERIMENT, "offset_round_trip", _round_trip(rng, count, 1.0), 1e-10, {"r": 1.0}))
    reports.append(bounded_report(EXPERIMENT, "offset_round_trip", _round_trip(rng, count, 1e-3), 1e-8, {"r": 1e-3}))

    z = PhasePoint.of(0.3, -0.2, 0.9)
    reports.append(bounded_report(
        EXPERIMENT, "velocity_closed_form", velocity_fd_residual(m, 1.2, 1e-4, z), 1e-6, {"r": 1.2, "dr": 1e-4},
    ))
    at_zero = endpoint(m, 0.0, z)
    reports.append(bounded_report(
        EXPERIMENT, "endpoint_at_zero", float(np.max(np.abs(at_zero.as_array() - z.as_array()))), 0.0,
    ))
    y, w = block_apply(mat_A(-1.0, 1.0), np.array([1.0]), np.array([0.0]))
    example = max(abs(float(y[0]) - 0.0), abs(float(w[0]) + 0.5))
    reports.append(bounded_report(EXPERIMENT, "endpoint_example", example, 1e-15, {"m": (-1.0, 1.0, 0.0), "r": 1.0}))
    return reports
