import numpy as np
import pytest

from src.field_calculus.fields import constant_field, gaussian_field
from src.field_calculus.singular import (
    calibrate_singular_constant,
    closed_form_constant,
    commute_check,
    commute_error,
    frac_line_singular,
    kernel_frac_dy,
    reference_wavelet,
    seeded_lines,
    singular_stencil,
)
from src.field_calculus.spectral import frac_line_spectral
from src.kernels import KernelId


def test_calibrated_constant_matches_closed_form():
    calibration = calibrate_singular_constant()
    assert calibration.constant == pytest.approx(calibration.closed_form, rel=1e-2)
    assert calibration.backend_agreement <= 1e-3
    assert closed_form_constant() > 0


def test_singular_backend_agrees_with_spectral_on_shifted_wavelet():
    x = np.linspace(-16.0, 16.0, 1024, endpoint=False)
    dx = x[1] - x[0]
    u = reference_wavelet(x - 1.0)
    spectral = frac_line_spectral(u, dx)
    singular = frac_line_singular(u, dx)
    assert np.linalg.norm(singular - spectral) <= 2e-3 * np.linalg.norm(spectral)


def test_stencil_is_symmetric_and_validated():
    stencil = singular_stencil(32, 0.1)
    assert stencil.shape == (63,)
    np.testing.assert_allclose(stencil, stencil[::-1])
    assert not stencil.flags.writeable
    with pytest.raises(ValueError):
        singular_stencil(4, 0.1)
    with pytest.raises(ValueError):
        singular_stencil(32, 0.1, order=1.5)


def test_non_decaying_line_is_refused():
    with pytest.raises(ValueError, match="decay"):
        frac_line_singular(np.ones(64), 0.1)


def test_vector_kernels_have_no_fractional_table():
    with pytest.raises(ValueError, match="scalar"):
        kernel_frac_dy(KernelId.vec(1.0))


def test_fractional_derivative_commutes_on_constants():
    err = commute_error(KernelId.mollifier(1.0), constant_field(1.0), lines=((0.0, 0.0),), nodes=12, line_points=128)
    assert err <= 1e-3


def test_seeded_lines_are_reproducible():
    lines = seeded_lines(12, seed=5)
    assert len(lines) == 12
    assert lines[0] == (0.0, 0.0)
    assert lines == seeded_lines(12, seed=5)
    assert lines != seeded_lines(12, seed=6)
    assert all(abs(t) <= 1.0 and abs(v) <= 1.5 for t, v in lines)
    with pytest.raises(ValueError):
        seeded_lines(0)


def test_commute_check_covers_seeded_lines():
    kid = KernelId.mollifier(1.0)
    report = commute_check(kid, constant_field(1.0), line_count=6, seed=3, samples=16, nodes=12, line_points=128)
    assert report.passed, report.measured
    assert report.parameters["lines"] == 6
    assert report.parameters["seed"] == 3
    err = commute_error(kid, gaussian_field(0.0), seeded_lines(6, seed=3), samples=16, nodes=12, line_points=128)
    assert 0.0 <= err < 1e-2
