import numpy as np
import pytest

from src.field_calculus.fields import constant_field, gaussian_field
from src.maximal_operators import (
    MaximalConfig,
    domination_check,
    fractional_integral_I1,
    homogeneity_check,
    kin1_vs_I1_check,
    maximal_kin,
    maximal_x,
    monotonicity_check,
    sample_points,
)


@pytest.fixture
def mcfg():
    return MaximalConfig.quick()


@pytest.fixture
def points():
    return sample_points(3, seed=2)


def test_sample_points_start_at_origin():
    pts = sample_points(5, seed=1)
    assert pts.shape == (5,)
    assert float(pts.t[0]) == 0.0 and float(pts.x[0, 0]) == 0.0 and float(pts.v[0, 0]) == 0.0
    assert np.all(np.abs(pts.as_array()) <= 1.5)


def test_constants_are_fixed_points(mcfg, points):
    const = constant_field(-2.0)
    np.testing.assert_allclose(maximal_x(const, points, mcfg), 2.0, atol=1e-12)
    np.testing.assert_allclose(maximal_kin(const, points, mcfg), 2.0, atol=1e-9)


def test_maximal_functions_dominate_the_field(mcfg, points):
    gauss = gaussian_field(0.0)
    values = gauss(points)
    assert float(maximal_x(gauss, points[:1], mcfg)[0]) == pytest.approx(1.0, rel=1e-2)
    assert np.all(maximal_kin(gauss, points, mcfg) >= values * (1.0 - 1e-2))


def test_maximal_kin_of_gaussian_at_origin_is_at_most_its_peak(mcfg, points):
    value = float(maximal_kin(gaussian_field(0.0), points[:1], mcfg)[0])
    assert 0.5 < value <= 1.0 + 1e-9


def test_fractional_integral_of_zero_vanishes(mcfg, points):
    zero = constant_field(1.0).scaled(0.0)
    assert np.all(fractional_integral_I1(zero, points, mcfg) == 0.0)


def test_operators_are_monotone_and_homogeneous(mcfg, points):
    assert all(r.passed for r in monotonicity_check(points, mcfg))
    assert all(r.passed for r in homogeneity_check(gaussian_field(0.0), points, mcfg))


def test_kin1_is_controlled_by_fractional_integral(mcfg, points):
    assert kin1_vs_I1_check(gaussian_field(0.0), points, mcfg).passed
    short = MaximalConfig(mcfg.r_grid, ball_nodes=12, i1_radius=1.0, face_nodes=10, radial_nodes=4)
    with pytest.raises(ValueError, match="cover"):
        kin1_vs_I1_check(gaussian_field(0.0), points, short)


def test_config_validation():
    with pytest.raises(ValueError):
        MaximalConfig(r_grid=())
    with pytest.raises(ValueError):
        MaximalConfig(r_grid=(1.0, 0.5))
    with pytest.raises(ValueError):
        MaximalConfig(ball_nodes=1)
    cfg = MaximalConfig.quick()
    assert cfg.grid_step == pytest.approx(2.0**0.25)
    assert cfg.i1_limit == 16.0


def test_kernel_transforms_are_dominated_by_maximal_functions(mcfg, points):
    reports = domination_check(gaussian_field(0.0), points, mcfg, radii=(0.5, 1.0, 2.0), nodes=10)
    checks = [r.check for r in reports]
    assert checks == [
        "vec_domination", "vec_gradient_domination",
        "vec_pi_domination", "vec_pi_gradient_domination",
        "tilde_domination", "tilde_gradient_domination",
    ]
    for report in reports:
        assert report.passed, (report.check, report.measured, report.target)
        assert 0.0 < report.measured <= report.target
        assert report.parameters["radii"] == 3


def test_domination_refuses_kernels_beyond_the_ball_grid(mcfg, points):
    with pytest.raises(ValueError, match="largest ball radius"):
        domination_check(gaussian_field(0.0), points, mcfg, radii=(64.0,), nodes=4)
