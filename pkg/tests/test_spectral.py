import math

import numpy as np
import pytest

from src.field_calculus.fields import GridField, GridSpec, constant_field, gaussian_field
from src.field_calculus.spectral import (
    LPBank,
    chi,
    eta,
    eta_tilde,
    frac_dx,
    lp_equivalence_band,
    lp_project,
    partition_defect,
    psi_j_identity_check,
    psi_l1_band,
    reconstruction_error,
    smooth_step,
    square_function,
    triple_frac_check,
)


@pytest.fixture
def grid():
    return GridSpec((4.0, 8.0, 4.0), (4, 64, 4))


def test_smooth_step_and_cutoffs():
    np.testing.assert_allclose(smooth_step([-1.0, 0.0, 0.5, 1.0, 2.0]), [0.0, 0.0, 0.5, 1.0, 1.0])
    np.testing.assert_allclose(chi([0.0, 1.0, 2.0, 3.0]), [1.0, 1.0, 0.0, 0.0])
    xi = np.linspace(0.5, 2.0, 31)
    assert np.all(eta(np.array([0.25, 3.0])) == 0.0)
    np.testing.assert_allclose(eta_tilde(xi), 1.0)


def test_frac_dx_on_plane_wave():
    periodic = GridSpec((1.0, math.pi, 1.0), (2, 64, 2))
    x = periodic.axes()[1]
    wave = GridField(periodic, np.broadcast_to(np.sin(8.0 * x)[None, :, None], periodic.shape))
    out = frac_dx(wave)
    np.testing.assert_allclose(out.samples, 2.0 * wave.samples, atol=1e-10)
    np.testing.assert_allclose(frac_dx(wave, order=1.0).samples, 8.0 * wave.samples, atol=1e-9)


def test_frac_dx_annihilates_constants(grid):
    out = frac_dx(grid.sample(constant_field(2.5)))
    assert float(np.max(np.abs(out.samples))) < 1e-12


def test_frac_dx_rejects_bad_input():
    odd = GridSpec.cube(12).sample(gaussian_field(0.0))
    with pytest.raises(ValueError, match="power-of-two"):
        frac_dx(odd)
    with pytest.raises(ValueError, match="backend"):
        frac_dx(odd, backend="wavelet")


def test_triple_fractional_derivative_is_full_derivative(grid):
    assert triple_frac_check(grid.sample(gaussian_field(0.0))).passed


def test_littlewood_paley_partition(grid):
    bank = LPBank.for_grid(grid)
    assert partition_defect(grid, bank) < 1e-12
    noise = GridField(grid, np.random.default_rng(0).standard_normal(grid.shape))
    assert reconstruction_error(noise, bank) < 1e-10


def test_widened_shell_fixes_projection(grid):
    bank = LPBank.for_grid(grid)
    j = (bank.j_min + bank.j_max) // 2
    noise = GridField(grid, np.random.default_rng(1).standard_normal(grid.shape))
    projected = lp_project(noise, j, bank)
    widened = lp_project(projected, j, bank, widened=True)
    np.testing.assert_allclose(widened.samples, projected.samples, atol=1e-10)
    assert psi_j_identity_check(noise, j, bank).passed


def test_bank_bounds():
    with pytest.raises(ValueError):
        LPBank(3, 2)
    bank = LPBank(-1, 2)
    assert list(bank.indices) == [-1, 0, 1, 2]
    with pytest.raises(ValueError, match="outside"):
        bank.check(5)


def test_psi_kernels_have_comparable_l1_norms(grid):
    band, norms = psi_l1_band(grid, LPBank.for_grid(grid))
    assert norms
    assert band <= 2.0


def test_square_function_is_comparable_to_fractional_derivative(grid):
    family = [grid.sample(gaussian_field(k)) for k in (0.0, 1.0, 2.0)]
    band, ratios = lp_equivalence_band(family)
    assert len(ratios) == 3
    assert band <= 6.0
    with pytest.raises(ValueError):
        square_function({})
