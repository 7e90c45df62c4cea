import math

import numpy as np
import pytest

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
    rho_kin,
    unit_ball_volume,
)


def test_compose_matches_group_law():
    z = PhasePoint.of(1.0, 2.0, 3.0)
    zeta = PhasePoint.of(0.5, -1.0, 4.0)
    out = compose(z, zeta)
    assert float(out.t) == 1.5
    assert float(out.x[0]) == 2.0 - 1.0 + 0.5 * 3.0
    assert float(out.v[0]) == 7.0


def test_group_axioms_on_random_clouds(rng):
    a, b, c = (random_points(rng, 200, radius=3.0) for _ in range(3))
    origin = PhasePoint.origin()
    assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), rtol=1e-10, atol=1e-9)
    assert compose(a, inverse(a)).allclose(origin, atol=1e-10)
    assert compose(inverse(a), a).allclose(origin, atol=1e-10)
    assert compose(a, origin).allclose(a)


def test_dilation_is_an_automorphism(rng):
    a = random_points(rng, 100, radius=2.0)
    b = random_points(rng, 100, radius=2.0)
    lhs = dilate(1.7, compose(a, b))
    rhs = compose(dilate(1.7, a), dilate(1.7, b))
    assert lhs.allclose(rhs, rtol=1e-12, atol=1e-10)
    with pytest.raises(ValueError):
        dilate(0.0, a)


def test_rho_box_is_homogeneous(rng):
    z = random_points(rng, 100, radius=5.0)
    for r in (0.3, 2.0, 7.0):
        np.testing.assert_allclose(rho_box(dilate(r, z)), r * rho_box(z), rtol=1e-12)


def test_rho_box_values():
    assert float(rho_box(PhasePoint.of(4.0, 8.0, 1.0))) == pytest.approx(2.0)
    assert float(rho_box(PhasePoint.origin())) == 0.0
    assert float(rho_kin(PhasePoint.origin())) == 0.0


def test_rho_kin_comparable_to_rho_box(rng):
    z = random_points(rng, 500, radius=4.0)
    box = rho_box(z)
    kin = rho_kin(z)
    assert np.all(kin >= box)
    assert np.all(kin <= (1.0 + 2.0 ** (1.0 / 3.0)) * box * (1.0 + 1e-12))


def test_quasi_constants_stay_in_known_ranges():
    constants = measure_quasi_constants(samples=5_000, seed=0)
    assert 0.5 < constants.triangle <= 1.0 + 1e-12
    assert 1.0 <= constants.inverse <= 2.0 ** (1.0 / 3.0) + 1e-12
    assert constants.kin_comparability() == pytest.approx(1.0 + constants.inverse)


def test_dimension_and_ball_volume():
    assert Dimension(1).Q == 6
    assert Dimension(3).Q == 14
    with pytest.raises(ValueError):
        Dimension(0)
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert kinetic_ball_volume(1.0, Dimension(1)) == pytest.approx(8.0)
    assert kinetic_ball_volume(2.0, Dimension(1)) == pytest.approx(8.0 * 2.0**6)


def test_phase_point_shape_checks():
    with pytest.raises(ValueError):
        PhasePoint.of([0.0, 1.0], [[0.0]], [[0.0], [1.0]])
    cloud = PhasePoint.of(np.zeros(3), np.zeros(3), np.ones(3))
    assert cloud.shape == (3,)
    assert cloud.d == 1
    assert cloud.as_array().shape == (3, 3)
    assert cloud[1:].shape == (2,)
