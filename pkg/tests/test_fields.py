import math

import numpy as np
import pytest

from src.field_calculus.fields import (
    AnalyticField,
    GridField,
    GridSpec,
    besov_seminorm,
    constant_field,
    delta_x_h,
    gaussian_field,
    gaussian_wavelet_field,
    linear_x_field,
    lp_norm,
)
from src.kinetic_group import PhasePoint, random_points


def transport_fd(f: AnalyticField, z: PhasePoint, delta: float = 1e-5) -> np.ndarray:
    ahead = PhasePoint(z.t + delta, z.x + delta * z.v, z.v)
    behind = PhasePoint(z.t - delta, z.x - delta * z.v, z.v)
    return (f(ahead) - f(behind)) / (2 * delta)


@pytest.mark.parametrize("f", [gaussian_field(0.0), gaussian_field(2.0), gaussian_wavelet_field(), linear_x_field(0.7)],
                         ids=lambda f: f.name)
def test_transport_derivative_matches_differences(f, rng):
    z = random_points(rng, 200, radius=1.5)
    np.testing.assert_allclose(f.transport_at(z), transport_fd(f, z), atol=1e-8)


def test_velocity_gradient_matches_differences(rng):
    f = gaussian_field(1.0)
    z = random_points(rng, 100, radius=1.5)
    delta = 1e-5
    fd = (f(PhasePoint(z.t, z.x, z.v + delta)) - f(PhasePoint(z.t, z.x, z.v - delta))) / (2 * delta)
    np.testing.assert_allclose(f.vgrad_at(z)[:, 0], fd, atol=1e-8)


def test_dilated_transport_picks_up_factor(rng):
    f = gaussian_field(0.0).dilated_tx(2.0, weight=3.0)
    z = random_points(rng, 100, radius=1.0)
    np.testing.assert_allclose(f.transport_at(z), transport_fd(f, z), atol=1e-7)
    with pytest.raises(ValueError):
        gaussian_field().dilated_tx(0.0)


def test_missing_derivatives_raise():
    f = AnalyticField(lambda z: z.t, name="bare")
    with pytest.raises(ValueError, match="transport"):
        f.transport_at(PhasePoint.origin())
    with pytest.raises(ValueError, match="velocity"):
        f.vgrad_at(PhasePoint.origin())


def test_scaled_and_shifted_fields():
    z = PhasePoint.of([0.0, 1.0], [0.5, -0.5], [0.2, 0.3])
    f = gaussian_field(0.0)
    np.testing.assert_allclose(f.scaled(-2.0)(z), -2.0 * f(z))
    np.testing.assert_allclose(f.shifted_x(0.5)(z), f(PhasePoint(z.t, z.x + 0.5, z.v)))
    assert f.shifted_x(0.5).reach == pytest.approx(9.5)
    np.testing.assert_allclose(f.scaled(-2.0).magnitude()(z), 2.0 * f(z))


def test_gaussian_l2_norm():
    grid = GridSpec.cube(32, 8.0)
    assert lp_norm(grid.sample(gaussian_field(0.0)), 2.0) == pytest.approx(math.pi**0.75, rel=1e-6)
    assert lp_norm(grid.sample(gaussian_field(0.0)), math.inf) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lp_norm(grid.sample(gaussian_field(0.0)), 0.5)


def test_delta_on_grid_matches_exact_difference():
    grid = GridSpec.cube(16, 6.0)
    h = 2 * grid.spacing[1]
    f = gaussian_field(1.0)
    on_grid = delta_x_h(grid.sample(f), h)
    exact = delta_x_h(f, h, grid)
    np.testing.assert_allclose(on_grid.samples[:, :-2], exact.samples[:, :-2], atol=1e-12)
    np.testing.assert_allclose(on_grid.samples[:, -2:], -grid.sample(f).samples[:, -2:])
    with pytest.raises(ValueError, match="multiple"):
        delta_x_h(grid.sample(f), 0.3 * grid.spacing[1])


def test_negative_shift_on_grid():
    grid = GridSpec.cube(8, 2.0)
    f = grid.sample(linear_x_field(1.0))
    moved = delta_x_h(f, -grid.spacing[1])
    np.testing.assert_allclose(moved.samples[:, 1:], -grid.spacing[1])


def test_besov_seminorm():
    grid = GridSpec.cube(16, 6.0)
    assert besov_seminorm(constant_field(3.0), 2.0, [0.5, 1.0], grid) == 0.0
    value = besov_seminorm(gaussian_field(0.0), 2.0, [0.5, 1.0], grid)
    assert value > 0.0
    with pytest.raises(ValueError):
        besov_seminorm(gaussian_field(0.0), 2.0, [0.0], grid)
    with pytest.raises(ValueError):
        besov_seminorm(gaussian_field(0.0), 2.0, [0.5])
    with pytest.raises(ValueError):
        besov_seminorm(gaussian_field(0.0), 2.0, [], grid)


def test_grid_spec_helpers():
    grid = GridSpec((4.0, 8.0, 2.0), (8, 16, 4))
    assert grid.spacing == (1.0, 1.0, 1.0)
    assert grid.cell_volume == 1.0
    assert grid.x_is_power_of_two
    assert grid.dilated(2.0).half_widths == (2.0, 4.0, 2.0)
    assert grid.points().x.shape == (8, 16, 4, 1)
    with pytest.raises(ValueError):
        GridSpec((1.0, 1.0, -1.0), (4, 4, 4))
    with pytest.raises(ValueError):
        GridSpec((1.0, 1.0, 1.0), (4, 1, 4))


def test_grid_field_arithmetic_and_mismatch():
    a = GridSpec.cube(8).sample(gaussian_field(0.0))
    b = GridSpec.cube(8, 4.0).sample(gaussian_field(0.0))
    np.testing.assert_allclose((a - a).samples, 0.0)
    np.testing.assert_allclose((a + a).samples, 2.0 * a.samples)
    with pytest.raises(ValueError, match="grid mismatch"):
        a - b
    with pytest.raises(ValueError):
        GridField(GridSpec.cube(8), np.zeros((8, 8, 4)))


def test_binary_and_csv_output(tmp_path):
    grid = GridSpec((2.0, 3.0, 1.0), (4, 8, 2))
    f = grid.sample(gaussian_field(1.0))
    path = tmp_path / "field.bin"
    f.to_binary(path)
    assert path.stat().st_size == 40 + 24 + 8 * 4 * 8 * 2
    back = GridField.from_binary(path)
    assert back.grid == grid
    np.testing.assert_array_equal(back.samples, f.samples)

    csv_path = tmp_path / "slice.csv"
    f.to_csv_slice(csv_path, 1, 0)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "t,x,v,value"
    assert len(lines) == 9


def test_truncated_binary_is_rejected(tmp_path):
    f = GridSpec.cube(8).sample(gaussian_field(0.0))
    path = tmp_path / "field.bin"
    f.to_binary(path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError, match="expected"):
        GridField.from_binary(path)


def test_kinetic_dilation_scales_value_and_derivatives(rng):
    base = gaussian_field(1.0)
    f = base.kinetic_dilated(0.5)
    z = random_points(rng, 100, radius=1.5)
    np.testing.assert_allclose(f(z), base(PhasePoint(0.25 * z.t, 0.125 * z.x, 0.5 * z.v)))
    np.testing.assert_allclose(f.transport_at(z), transport_fd(f, z), atol=1e-8)
    delta = 1e-5
    fd = (f(PhasePoint(z.t, z.x, z.v + delta)) - f(PhasePoint(z.t, z.x, z.v - delta))) / (2 * delta)
    np.testing.assert_allclose(f.vgrad_at(z)[:, 0], fd, atol=1e-8)
    assert f.reach == pytest.approx(9.0 * 8.0)
    with pytest.raises(ValueError):
        base.kinetic_dilated(-1.0)


def test_kinetically_dilated_grid_keeps_counts():
    grid = GridSpec((1.0, 2.0, 3.0), (8, 16, 4)).kinetic_dilated(2.0)
    assert grid.half_widths == (4.0, 16.0, 6.0)
    assert grid.shape == (8, 16, 4)
    f = gaussian_field(0.0)
    coarse = lp_norm(GridSpec.cube(24, 8.0).sample(f), 2.0)
    stretched = lp_norm(GridSpec.cube(24, 8.0).kinetic_dilated(2.0).sample(f.kinetic_dilated(0.5)), 2.0)
    assert stretched == pytest.approx(2.0**3 * coarse, rel=1e-6)
