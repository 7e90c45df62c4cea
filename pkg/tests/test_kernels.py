import math

import numpy as np
import pytest

from src.kernels import (
    BumpSpec,
    KernelId,
    KernelKind,
    bump_eval,
    bump_grad,
    bump_mass,
    kernel_eval,
    kernel_grad_norm,
    kernel_grad_y,
    kernel_grad_y_fd,
    kernel_integral,
    kernel_mass,
    kernel_norm,
    kernel_support_box,
    kernel_x_difference_norm,
    min_envelope_integral,
    profile,
    size_constants,
    support_constant,
    support_rule,
)
from src.kinetic_group import PhasePoint


def test_profile_values():
    np.testing.assert_allclose(profile([0.0, 0.5, 1.0, -2.0]), [math.exp(-1.0), math.exp(-1.0 / 0.75), 0.0, 0.0])


def test_bump_is_normalized():
    assert bump_mass(64) == pytest.approx(1.0, abs=1e-6)
    assert BumpSpec.standard(1).describe()["normalization"] > 0


def test_bump_vanishes_outside_box():
    assert bump_eval(-0.5, [[0.0]], [[0.0]])[0] == 0.0
    assert bump_eval(-1.5, [[1.2]], [[0.0]])[0] == 0.0
    assert bump_eval(-1.5, [[0.0]], [[0.0]])[0] > 0.0


def test_bump_gradient_matches_central_difference():
    a = np.array([-1.4, -1.7])
    b1 = np.array([[0.3], [-0.2]])
    b2 = np.array([[0.1], [0.5]])
    g1, g2 = bump_grad(a, b1, b2)
    delta = 1e-6
    fd1 = (bump_eval(a, b1 + delta, b2) - bump_eval(a, b1 - delta, b2)) / (2 * delta)
    fd2 = (bump_eval(a, b1, b2 + delta) - bump_eval(a, b1, b2 - delta)) / (2 * delta)
    np.testing.assert_allclose(g1[:, 0], fd1, rtol=1e-6)
    np.testing.assert_allclose(g2[:, 0], fd2, rtol=1e-6)


def test_kernel_id_validation():
    with pytest.raises(ValueError):
        KernelId.tilde(0.0)
    kid = KernelId("vec", 2.0)
    assert kid.kind is KernelKind.VEC
    assert kid.is_vector
    assert kid.label() == "vec(2)"
    assert KernelId.tilde(1.0).size_exponent == 1


@pytest.mark.parametrize("tau", [0.5, 2.0])
def test_mollifier_has_unit_mass(tau):
    assert kernel_mass(tau, 64) == pytest.approx(1.0, abs=1e-6)


def test_tilde_mass_is_three_r():
    r = 0.5
    assert float(kernel_integral(KernelId.tilde(r), 64)) == pytest.approx(3.0 * r, rel=1e-6)


def test_kernels_vanish_outside_time_window():
    offsets = PhasePoint.of([0.5, -3.0, -0.9], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    for make in (KernelId.mollifier, KernelId.tilde):
        assert np.all(kernel_eval(make(1.0), offsets) == 0.0)
    assert np.all(kernel_eval(KernelId.vec(1.0), offsets) == 0.0)
    assert kernel_eval(KernelId.vec_pi(1.0), offsets).shape == (3, 1)


def test_mollifier_is_nonnegative_with_unit_l1_norm():
    offsets, _ = support_rule(KernelId.mollifier(1.0), 16)
    assert np.all(kernel_eval(KernelId.mollifier(1.0), offsets) >= 0.0)
    assert kernel_norm(KernelId.mollifier(1.0), 1.0, 48) == pytest.approx(1.0, rel=1e-4)


def test_tilde_theta_norm_scales_exactly():
    theta = 6.0 / 5.0
    base = kernel_norm(KernelId.tilde(1.0), theta, 48)
    scaled = kernel_norm(KernelId.tilde(2.0), theta, 48)
    assert scaled == pytest.approx(base, rel=1e-4)


@pytest.mark.parametrize("make", [KernelId.mollifier, KernelId.tilde, KernelId.vec])
def test_chain_rule_gradient_matches_differences(make):
    kid = make(1.0)
    offsets, _ = support_rule(kid, 8)
    exact = kernel_grad_y(kid, offsets)
    fd = kernel_grad_y_fd(kid, offsets, 1e-5)
    assert float(np.max(np.abs(exact - fd))) <= 1e-6 * float(np.max(np.abs(exact)))


def test_vector_kernel_shapes():
    offsets, _ = support_rule(KernelId.vec(1.0), 4)
    assert kernel_eval(KernelId.vec(1.0), offsets).shape == (64, 1)
    assert kernel_grad_y(KernelId.vec(1.0), offsets).shape == (64, 1, 1)
    assert kernel_grad_y(KernelId.vec_pi(1.0), offsets).shape == (64, 1, 1)
    assert kernel_integral(KernelId.vec_pi(1.0), 16).shape == (1,)


def test_support_box_and_constant():
    box = kernel_support_box(KernelId.mollifier(2.0))
    assert box.s_lo == -8.0 and box.s_hi == -4.0
    offsets, _ = support_rule(KernelId.mollifier(2.0), 8)
    assert np.all(box.contains(offsets, margin=1e-12))
    c = support_constant(KernelId.mollifier(1.0))
    assert 1.0 <= c < 10.0


def test_size_constants_are_finite():
    sizes = size_constants(KernelId.tilde(1.0), nodes=12)
    assert 0.0 < sizes["value"] < math.inf
    assert 0.0 < sizes["gradient"] < math.inf


def test_x_difference_norm_limits():
    kid = KernelId.mollifier(1.0)
    assert kernel_x_difference_norm(kid, 0.0, 1.0) == 0.0
    far = kernel_x_difference_norm(kid, 100.0, 1.0, 24)
    assert far == pytest.approx(2.0, rel=5e-3)
    near = kernel_x_difference_norm(kid, 1e-3, 1.0, 24)
    assert 0.0 < near <= 1e-3 * kernel_grad_norm(kid, 1.0, 24) * (1.0 + 1e-3)


def test_min_envelope_integral_matches_closed_form():
    for height, weight in ((1.0, 1.0), (2.0, 0.1)):
        expected = 1.5 * height ** (2.0 / 3.0) * weight ** (1.0 / 3.0)
        assert min_envelope_integral(height, weight) == pytest.approx(expected, rel=1e-2)
    with pytest.raises(ValueError):
        min_envelope_integral(0.0, 1.0)
