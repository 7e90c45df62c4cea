"""Phase-space fields, kinetic convolution and x-frequency operators."""

from .convolution import FieldRule, KernelRule, convolve_points, kinetic_convolve, young_check
from .fields import (
    AnalyticField,
    GridField,
    GridSpec,
    besov_seminorm,
    delta_x_h,
    gaussian_field,
    lp_norm,
    standard_family,
)
from .singular import calibrate_singular_constant, commute_check, frac_line_singular, kernel_frac_dy
from .spectral import LPBank, frac_dx, lp_project, psi_j_identity_check, square_function
