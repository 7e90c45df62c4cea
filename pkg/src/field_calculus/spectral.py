"""
Fourier multipliers in x: D_x^s, Littlewood-Paley shells and the Psi_j kernels.

All multipliers act along the x-axis of a GridField, slice by slice in
(t, v), through numpy.fft on the periodic x-lattice. Frequencies are
xi = 2 pi fftfreq(n, dx).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..schema import VerificationReport, bounded_report
from ..util.fitting import ratio_band
from .fields import GridField, GridSpec, lp_norm

logger = logging.getLogger(__name__)

# Bound on the square-function / D^(1/3) ratio band; the per-frequency
# multiplier of the square function stays in [2^(-5/3), 2^(2/3)].
LP_BAND_LIMIT = 6.0


def _require_power_of_two(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"spectral operators need a power-of-two x-axis, got {n} points")


def frequencies(n: int, dx: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, dx)


def apply_symbol(u, dx: float, symbol: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Multiply the Fourier coefficients along the last axis by symbol(xi); real part returned."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    _require_power_of_two(n)
    xi = frequencies(n, dx)
    return np.real(np.fft.ifft(np.fft.fft(u, axis=-1) * symbol(xi), axis=-1))


def frac_line_spectral(u, dx: float, order: float = 1.0 / 3.0) -> np.ndarray:
    """|xi|^order multiplier along the last axis."""
    return apply_symbol(u, dx, lambda xi: np.abs(xi) ** order)


def _along_x(f: GridField, op: Callable[[np.ndarray], np.ndarray]) -> GridField:
    moved = np.moveaxis(f.samples, 1, -1)
    return GridField(f.grid, np.moveaxis(op(moved), -1, 1))


def fourier_multiplier(f: GridField, symbol: Callable[[np.ndarray], np.ndarray]) -> GridField:
    """Apply symbol(xi) along x to every (t, v) slice (and component)."""
    dx = f.grid.spacing[1]
    return _along_x(f, lambda u: apply_symbol(u, dx, symbol))


def frac_dx(f: GridField, order: float = 1.0 / 3.0, backend: str = "spectral") -> GridField:
    """
    D_x^s = (-Delta_x)^(s/2) along the x-axis.

    backend "spectral" multiplies by |xi|^s on the periodic lattice;
    "singular" applies the calibrated singular-integral stencil, which
    needs the field to decay at both x-ends.
    """
    dx = f.grid.spacing[1]
    if backend == "spectral":
        _require_power_of_two(f.grid.shape[1])
        return _along_x(f, lambda u: frac_line_spectral(u, dx, order))
    if backend == "singular":
        from .singular import frac_line_singular

        return _along_x(f, lambda u: frac_line_singular(u, dx, order))
    raise ValueError(f"unknown backend {backend!r}; expected 'spectral' or 'singular'")


def triple_frac_check(f: GridField, tolerance: float = 1e-10) -> VerificationReport:
    """(D_x^(1/3))^3 f against the |xi| multiplier, relative sup error."""
    once = frac_dx(f)
    thrice = frac_dx(frac_dx(once))
    full = fourier_multiplier(f, np.abs)
    scale = float(np.max(np.abs(full.samples)))
    err = float(np.max(np.abs(thrice.samples - full.samples))) / scale if scale > 0 else 0.0
    return bounded_report("field_calculus", "triple_frac", err, tolerance, {"grid": f.grid.shape})


def smooth_step(x) -> np.ndarray:
    """0 for x <= 0, 1 for x >= 1, C-infinity in between."""
    x = np.asarray(x, dtype=float)
    pos = np.where(x > 0, x, 1.0)
    neg = np.where(1.0 - x > 0, 1.0 - x, 1.0)
    a = np.where(x > 0, np.exp(-1.0 / pos), 0.0)
    b = np.where(1.0 - x > 0, np.exp(-1.0 / neg), 0.0)
    return a / (a + b)


def chi(u) -> np.ndarray:
    """1 on [0, 1], 0 on [2, inf)."""
    return smooth_step(2.0 - np.asarray(u, dtype=float))


def eta(xi) -> np.ndarray:
    a = np.abs(xi)
    return chi(a) - chi(2.0 * a)


def eta_tilde(xi) -> np.ndarray:
    """Equal to one on supp eta."""
    a = np.abs(xi)
    return chi(0.5 * a) - chi(4.0 * a)


@dataclass(frozen=True)
class LPBank:
    """Dyadic shells eta_j(xi) = eta(2^-j xi) for j_min <= j <= j_max."""

    j_min: int
    j_max: int

    def __post_init__(self):
        if self.j_max < self.j_min:
            raise ValueError(f"empty bank [{self.j_min}, {self.j_max}]")

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "LPBank":
        """Shells telescoping to one at every nonzero frequency of the grid's x-lattice."""
        X = grid.half_widths[1]
        dx = grid.spacing[1]
        xi_min = math.pi / X
        xi_max = math.pi / dx
        return cls(int(math.floor(math.log2(xi_min))), int(math.ceil(math.log2(xi_max))))

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def check(self, j: int) -> None:
        if not self.j_min <= j <= self.j_max:
            raise ValueError(f"shell {j} outside bank [{self.j_min}, {self.j_max}]")

    def shell(self, j: int, xi: np.ndarray, widened: bool = False) -> np.ndarray:
        self.check(j)
        scaled = xi * 2.0 ** (-j)
        return eta_tilde(scaled) if widened else eta(scaled)

    def describe(self) -> dict:
        return {"j_min": self.j_min, "j_max": self.j_max, "profile": "chi(|xi|) - chi(2|xi|)"}


def lp_project(f: GridField, j: int, bank: LPBank, widened: bool = False) -> GridField:
    """P_j f (or the widened P~_j f)."""
    bank.check(j)
    return fourier_multiplier(f, lambda xi: bank.shell(j, xi, widened))


def reconstruction_error(f: GridField, bank: LPBank) -> float:
    """Relative sup error of sum_j P_j f against f with its x-mean removed."""
    total = np.zeros_like(f.samples)
    for j in bank.indices:
        total += lp_project(f, j, bank).samples
    target = fourier_multiplier(f, lambda xi: (xi != 0).astype(float)).samples
    scale = float(np.max(np.abs(target)))
    return float(np.max(np.abs(total - target))) / scale if scale > 0 else 0.0


def partition_defect(grid: GridSpec, bank: LPBank) -> float:
    """max over nonzero lattice frequencies of |sum_j eta_j - 1|."""
    xi = frequencies(grid.shape[1], grid.spacing[1])
    xi = xi[xi != 0]
    total = sum(bank.shell(j, xi) for j in bank.indices)
    return float(np.max(np.abs(total - 1.0)))


def psi_symbol(j: int, xi: np.ndarray, bank: LPBank) -> np.ndarray:
    """-i 2^j xi |xi|^-2 eta_j(xi), zero at xi = 0."""
    safe = np.where(xi != 0, xi, 1.0)
    return np.where(xi != 0, -1j * 2.0**j * xi / safe**2, 0.0) * bank.shell(j, xi)


def psi_j_identity_check(f: GridField, j: int, bank: LPBank, tolerance: float = 1e-10) -> VerificationReport:
    """P_j f = 2^-j d_x (Psi_j * P~_j f), compared in the sup norm."""
    dx = f.grid.spacing[1]
    _require_power_of_two(f.grid.shape[1])
    direct = lp_project(f, j, bank)

    def rebuilt_symbol(xi):
        return 2.0 ** (-j) * (1j * xi) * psi_symbol(j, xi, bank) * bank.shell(j, xi, widened=True)

    rebuilt = _along_x(f, lambda u: apply_symbol(u, dx, rebuilt_symbol))
    scale = float(np.max(np.abs(direct.samples)))
    err = float(np.max(np.abs(rebuilt.samples - direct.samples)))
    err = err / scale if scale > 0 else err
    return bounded_report("field_calculus", "psi_identity", err, tolerance, {"j": j, "grid": f.grid.shape})


def psi_kernel_l1(j: int, grid: GridSpec, bank: LPBank, refine: int = 8) -> float:
    """
    ||Psi_j||_{L^1} from the inverse transform on a lattice `refine` times
    finer than the grid's x-lattice over the same period.
    """
    n = grid.shape[1] * refine
    _require_power_of_two(n)
    xi = frequencies(n, grid.spacing[1] / refine)
    kernel = np.fft.ifft(psi_symbol(j, xi, bank))
    return float(np.sum(np.abs(kernel)))


def psi_l1_band(grid: GridSpec, bank: LPBank, refine: int = 8) -> tuple[float, dict[int, float]]:
    """Ratio band of ||Psi_j||_1 over the interior shells j_min+3 .. j_max-1."""
    norms = {j: psi_kernel_l1(j, grid, bank, refine) for j in range(bank.j_min + 3, bank.j_max)}
    if not norms:
        raise ValueError("bank has no interior shells")
    return ratio_band(list(norms.values())), norms


def square_function(projections: Mapping[int, GridField], order: float = 1.0 / 3.0) -> GridField:
    """(sum_j 2^(2 j order) |P_j u|^2)^(1/2) pointwise."""
    if not projections:
        raise ValueError("square function needs at least one shell")
    grids = {p.grid for p in projections.values()}
    if len(grids) != 1:
        raise ValueError("grid mismatch")
    acc = None
    for j, pj in projections.items():
        term = 2.0 ** (2.0 * j * order) * pj.magnitude() ** 2
        acc = term if acc is None else acc + term
    return GridField(grids.pop(), np.sqrt(acc))


def square_function_of(f: GridField, bank: LPBank, order: float = 1.0 / 3.0) -> GridField:
    return square_function({j: lp_project(f, j, bank) for j in bank.indices}, order)


def lp_equivalence_band(fields: Sequence[GridField], p: float = 2.0) -> tuple[float, list[float]]:
    """
    Ratios ||S u||_p / ||D_x^(1/3) u||_p over the fields and their max/min band.
    """
    ratios = []
    for f in fields:
        bank = LPBank.for_grid(f.grid)
        ratios.append(lp_norm(square_function_of(f, bank), p) / lp_norm(frac_dx(f), p))
    logger.debug("square-function ratios: %s", ratios)
    return ratio_band(ratios), ratios
