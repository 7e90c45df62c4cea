import math

import numpy as np
import pytest

from src.defect_engine import (
    SPLIT_VARIANTS,
    besov_tail,
    defect_direct,
    defect_via_representation,
    full_l2_norm,
    make_gaussian_split,
    frac_block_grid,
    mollified_frac_decay,
    mollifier_decay,
    mollify,
    relative_l2,
    representation_channels,
    representation_error,
    rescale_split,
    trajectory_average,
    transport_residual,
)
from src.checks.defect import constant_split
from src.field_calculus.fields import GridField, GridSpec, constant_field
from src.kinetic_group import random_points


@pytest.fixture
def cloud(rng):
    return random_points(rng, 4, radius=1.5)


@pytest.mark.parametrize("variant", SPLIT_VARIANTS)
def test_splits_satisfy_transport_equation(variant, rng):
    split = make_gaussian_split(variant)
    points = random_points(rng, 500, radius=3.0)
    assert transport_residual(split, points) <= 1e-12
    assert transport_residual(rescale_split(split, 2.5), points) <= 1e-12


def test_split_metadata():
    assert not make_gaussian_split("S0-zero").has_S0
    assert make_gaussian_split("S0-generic").has_S0
    with pytest.raises(ValueError, match="unknown split"):
        make_gaussian_split("S0-random")


def test_trajectory_and_kernel_paths_agree(cloud):
    f = make_gaussian_split().f
    along = mollify(f, 1.0, cloud, 64, path="trajectory")
    kernel = mollify(f, 1.0, cloud, 64, path="kernel")
    assert relative_l2(kernel, along) <= 1e-6
    with pytest.raises(ValueError, match="path"):
        mollify(f, 1.0, cloud, 8, path="spectral")


def test_constants_are_reproduced(cloud):
    np.testing.assert_allclose(trajectory_average(constant_field(1.5), 1.0, cloud, 64), 1.5, rtol=1e-6)
    split = constant_split(1.5)
    assert float(np.max(np.abs(defect_direct(split, 1.0, cloud, 64)))) <= 1.5e-6
    rep = defect_via_representation(split, 1.0, cloud, r_nodes=16, kernel_nodes=8)
    assert float(np.max(np.abs(rep))) <= 1e-12


def test_representation_matches_direct_defect(cloud):
    for variant in SPLIT_VARIANTS:
        err = representation_error(make_gaussian_split(variant), 1.0, cloud, r_nodes=24, kernel_nodes=16, quad_nodes=32)
        assert err <= 1e-2, variant


def test_channels_and_grid_targets():
    grid = GridSpec.cube(4, 2.0)
    channels = representation_channels(make_gaussian_split("S0-zero"), 0.5, grid, r_nodes=16, kernel_nodes=8)
    assert set(channels) == {"S0", "S1", "vgrad"}
    assert isinstance(channels["S1"], GridField)
    assert np.all(channels["S0"].samples == 0.0)
    direct = defect_direct(make_gaussian_split(), 0.5, grid, 8)
    assert direct.grid == grid


def test_point_targets_must_be_flat():
    with pytest.raises(ValueError, match="flat"):
        defect_direct(make_gaussian_split(), 1.0, GridSpec.cube(4).points(), 8)


def test_relative_l2():
    assert relative_l2(np.array([3.0, 4.0]), np.array([3.0, 4.0])) == 0.0
    assert relative_l2(np.array([3.0, 4.0]), np.array([3.0, 5.0])) == pytest.approx(0.2)
    assert relative_l2(np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(5.0)


def test_full_l2_norm_of_gaussian():
    assert full_l2_norm(make_gaussian_split().f) == pytest.approx(math.pi**0.75, rel=1e-6)


def test_mollifier_fractional_norm_decays_like_inverse_tau():
    report, norms = mollifier_decay(taus=(1.0, 2.0, 4.0), nodes=16, line_points=256)
    assert report.passed, report.measured
    assert norms[1.0] > norms[2.0] > norms[4.0]


def test_mollified_fractional_derivative_decays_in_tau():
    f = make_gaussian_split().f
    reports = mollified_frac_decay(f, nodes=16, line_points=256, field_nodes=10, step_scale=1.5)
    by_check = {}
    for report in reports:
        by_check.setdefault(report.check, []).append(report)

    assert [r.parameters["tau"] for r in by_check["mollified_frac_ratio"]] == [1.0, 2.0, 4.0, 8.0]
    for report in by_check["mollified_frac_ratio"] + by_check["codilated_frac_ratio"]:
        assert report.passed, (report.check, report.parameters["tau"], report.measured)

    fixed = by_check["mollified_frac_slope"][0]
    codilated = by_check["codilated_frac_slope"][0]
    norms = fixed.parameters["norms"]
    assert all(a > b > 0 for a, b in zip(norms, norms[1:]))
    assert fixed.passed and fixed.measured < -1.0, fixed.measured
    assert abs(codilated.measured + 1.0) < 0.25, codilated.measured
    assert fixed.note


def test_frac_block_grid_keeps_its_size_as_tau_grows():
    small = frac_block_grid(1.0)
    large = frac_block_grid(8.0)
    assert math.prod(large.shape) <= math.prod(small.shape)
    assert large.x_is_power_of_two
    assert small.half_widths[0] == pytest.approx(0.5 + 5.0)
    assert large.half_widths[0] == pytest.approx(64 * (0.5 + 5.0 / 64))


def test_besov_tail_constant_is_bounded():
    report = besov_tail(make_gaussian_split().f, taus=(1.0,), hs=(0.1, 1.0))
    assert report.passed, (report.measured, report.target)
