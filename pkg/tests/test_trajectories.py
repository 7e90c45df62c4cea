import numpy as np
import pytest

from src.kinetic_group import PhasePoint
from src.trajectories import (
    TrajectoryParams,
    block_det,
    displacement_scaling_slope,
    endpoint,
    endpoint_inverse_params,
    endpoint_offset,
    forcing,
    mat_A,
    mat_A_inv,
    mat_D,
    mat_E,
    mat_F,
    mat_W,
    trajectory_velocity,
    velocity_fd_residual,
    verify_M1,
    verify_M2,
    verify_M3,
    verify_M4,
)
from src.util.quadrature import dyadic_grid


def test_forcing_closed_forms_at_one():
    fv = forcing(1.0)
    assert float(fv.g1) == pytest.approx(0.0)
    assert float(fv.g2) == pytest.approx(1.0)
    assert float(fv.h1) == pytest.approx(0.5)
    assert float(fv.h2) == pytest.approx(1.5)
    assert float(fv.f1) == pytest.approx(2.0)
    assert float(fv.f2) == pytest.approx(1.0)


def test_forcing_at_zero_vanishes_and_marks_f_undefined():
    fv = forcing(np.array([0.0, 1.0]))
    assert fv.g1[0] == 0.0 and fv.h2[0] == 0.0
    assert np.isnan(fv.f1[0])
    assert fv.f_defined.tolist() == [False, True]
    with pytest.raises(ValueError):
        forcing(-1.0)


def test_h_is_derivative_relation():
    r = np.linspace(0.3, 3.0, 50)
    dr = 1e-6
    fv = forcing(r)
    dg1 = (forcing(r + dr).g1 - forcing(r - dr).g1) / (2 * dr)
    np.testing.assert_allclose(dg1, 2 * r * fv.h1, rtol=1e-6, atol=1e-8)
    dh1 = (forcing(r + dr).h1 - forcing(r - dr).h1) / (2 * dr)
    np.testing.assert_allclose(dh1, fv.f1, rtol=1e-6, atol=1e-8)


def test_determinant_identity():
    m0, r = np.meshgrid([-2.0, -1.0, 0.5], [0.25, 1.0, 4.0], indexing="ij")
    np.testing.assert_allclose(block_det(mat_A(m0, r)), -0.5 * r**4, rtol=1e-12)
    assert verify_M2(m0, r).passed


def test_inverse_is_inverse():
    m0, r = np.meshgrid([-1.5, 2.0], [0.1, 1.0, 10.0], indexing="ij")
    prod = np.einsum("...ij,...jk->...ik", mat_A(m0, r), mat_A_inv(m0, r))
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-10)


def test_matrix_preconditions():
    with pytest.raises(ValueError):
        mat_A(0.0, 1.0)
    with pytest.raises(ValueError):
        mat_A_inv(-1.0, 0.0)
    with pytest.raises(ValueError):
        TrajectoryParams.of(0.0, 1.0, 1.0)
    assert mat_F(-1.0, np.ones(4)).shape == (4, 2)


def test_endpoint_at_zero_is_identity():
    m = TrajectoryParams.of(-1.0, 0.3, 0.7)
    z = PhasePoint.of(0.5, -1.0, 2.0)
    assert endpoint(m, 0.0, z).allclose(z)


def test_endpoint_inverse_recovers_parameters():
    rng = np.random.default_rng(5)
    m = TrajectoryParams.of(rng.uniform(-2, -1, 30), rng.uniform(-1, 1, 30), rng.uniform(-1, 1, 30))
    for r in (0.5, 1.0, 3.0):
        back = endpoint_inverse_params(r, endpoint_offset(m, r))
        np.testing.assert_allclose(back.as_array(), m.as_array(), rtol=1e-9, atol=1e-9)


def test_trajectory_condition_second_order():
    m = TrajectoryParams.of(-1.3, 0.4, -0.8)
    report = verify_M1(m, 1.2, 0.02, PhasePoint.of(0.2, 0.5, -0.4))
    assert report.passed, report
    with pytest.raises(ValueError):
        verify_M1(m, 0.01, 0.02)


def test_inverse_columns_scale_and_constants_bounded():
    r_grid = dyadic_grid(-4, 4, 8)
    assert all(report.passed for report in verify_M3((-2.0, -1.0), r_grid))
    report = verify_M4(TrajectoryParams.of(-1.5, 0.7, -0.4), r_grid)
    assert report.passed, report.parameters


def test_zero_direction_has_zero_constants():
    report = verify_M4(TrajectoryParams.of(-1.0, 0.0, 0.0), [0.5, 1.0, 2.0])
    assert report.measured == 0.0


def test_displacement_scales_like_r_cubed():
    slope = displacement_scaling_slope(-1.0, dyadic_grid(-3, 3, 4))
    assert slope == pytest.approx(3.0, abs=0.05)


def test_factor_matrices():
    np.testing.assert_allclose(mat_W(0.0), np.zeros((2, 2)))
    np.testing.assert_allclose(mat_W(1.0), [[0.0, 1.0], [0.5, 1.5]], atol=1e-15)
    np.testing.assert_allclose(mat_D(-2.0), [[-2.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(mat_E(3.0, 0.0), np.eye(2))
    np.testing.assert_allclose(mat_E(3.0, 2.0), [[1.0, 12.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        mat_E(1.0, -0.5)


@pytest.mark.parametrize("m0", [-2.0, -1.5, -1.0])
def test_A_is_W_conjugated_by_D(m0):
    r = dyadic_grid(-3, 3, 4)
    conj = mat_D(m0) @ mat_W(r) @ mat_D(1.0 / m0)
    np.testing.assert_allclose(conj, mat_A(m0, r), rtol=1e-14, atol=1e-300)


def test_velocity_closed_form_matches_finite_differences():
    m = TrajectoryParams.of(-1.5, 0.7, -0.4)
    z = PhasePoint.of(0.3, -0.2, 0.9)
    assert velocity_fd_residual(m, 1.2, 1e-4, z) <= 1e-6
    assert trajectory_velocity(m, 1.2).shape == (1,)
