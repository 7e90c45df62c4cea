"""
Singular-integral fractional derivative along x.

    D^s u(x) = c_s * integral over h > 0 of (2u(x) - u(x+h) - u(x-h)) h^(-1-s) dh

On a uniform lattice the integral is a symmetric Toeplitz stencil. Writing
the integrand as G(h) h^(1-s) with G(h) = (2u(x) - u(x+h) - u(x-h)) / h^2,
G is interpolated linearly between lattice lags and integrated exactly
against h^(1-s). G(0) = -u''(x) comes from the fourth-order central
difference, and beyond the last lag only 2u(x) h^(-1-s) survives, which
integrates in closed form. A Richardson step against the stencil on the
doubled spacing removes the leading interpolation error.

The stencil is applied with zero padding, so input lines must decay to
zero at both ends.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma

from ..kernels import KernelId, kernel_eval, kernel_support_box
from ..kinetic_group import PhasePoint
from ..schema import VerificationReport, bounded_report
from ..trajectories import mat_A
from ..util.quadrature import gauss_legendre
from .convolution import KernelRule
from .fields import AnalyticField
from .spectral import frac_line_spectral

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 1.0 / 3.0

# Lines whose end values exceed this fraction of the peak are refused.
DECAY_THRESHOLD = 1e-12

# Rows of length n processed per fftconvolve call: about this many samples.
MAX_ROW_ENTRIES = 1 << 22

# (t, v) lines and x-samples per line used by the commute check.
DEFAULT_LINE_COUNT = 12
DEFAULT_LINE_SAMPLES = 32


def _product_weights(count: int, p: float, dx: float) -> np.ndarray:
    """Weights of lags 0..count for the piecewise-linear rule against h^p on [0, count*dx]."""
    k = np.arange(count, dtype=float)
    m0 = ((k + 1.0) ** (p + 1.0) - k ** (p + 1.0)) / (p + 1.0)
    m1 = ((k + 1.0) ** (p + 2.0) - k ** (p + 2.0)) / (p + 2.0)
    w = np.zeros(count + 1)
    w[:-1] += (k + 1.0) * m0 - m1
    w[1:] += m1 - k * m0
    return w * dx ** (p + 1.0)


def _raw_stencil(count: int, dx: float, order: float) -> np.ndarray:
    """Stencil of lags -count..count for the unscaled integral (c_s = 1)."""
    w = _product_weights(count, 1.0 - order, dx)
    stencil = np.zeros(2 * count + 1)
    mid = count
    lags = np.arange(1, count + 1)
    g = w[1:] / (lags * dx) ** 2
    stencil[mid] += 2.0 * g.sum()
    stencil[mid + lags] -= g
    stencil[mid - lags] -= g
    # G(0) = -u''
    fd = w[0] / (12.0 * dx**2)
    stencil[mid] += 30.0 * fd
    stencil[mid + 1] -= 16.0 * fd
    stencil[mid - 1] -= 16.0 * fd
    stencil[mid + 2] += fd
    stencil[mid - 2] += fd
    stencil[mid] += 2.0 * (count * dx) ** (-order) / order
    return stencil


@lru_cache(maxsize=32)
def singular_stencil(n: int, dx: float, order: float = DEFAULT_ORDER) -> np.ndarray:
    """
    Richardson-combined stencil of length 2n - 1 for lines of n points.

    Returns:
        read-only array; entry n - 1 + k multiplies u(x - k dx)
    """
    if n < 8:
        raise ValueError(f"singular stencil needs at least 8 points per line, got {n}")
    if not 0.0 < order < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {order}")
    count = n - 1
    fine = _raw_stencil(count, dx, order)
    half = count // 2
    coarse = _raw_stencil(half, 2.0 * dx, order)
    spread = np.zeros_like(fine)
    spread[count - 2 * half:count + 2 * half + 1:2] = coarse
    stencil = (4.0 * fine - spread) / 3.0
    stencil.flags.writeable = False
    return stencil


def closed_form_constant(order: float = DEFAULT_ORDER) -> float:
    """c_s = 1 / (-2 Gamma(-s) cos(pi s / 2)), the one-sided normalization."""
    return 1.0 / (-2.0 * float(gamma(-order)) * math.cos(0.5 * math.pi * order))


def _check_decay(u: np.ndarray) -> None:
    peak = float(np.max(np.abs(u))) if u.size else 0.0
    edge = float(max(np.max(np.abs(u[..., 0])), np.max(np.abs(u[..., -1])))) if u.size else 0.0
    if edge > DECAY_THRESHOLD * peak:
        raise ValueError(
            f"line does not decay at the boundary: edge {edge:.3g} vs peak {peak:.3g}"
        )


def frac_line_singular(
    u,
    dx: float,
    order: float = DEFAULT_ORDER,
    constant: Optional[float] = None,
) -> np.ndarray:
    """
    D^s along the last axis by the singular-integral stencil.

    `constant` defaults to the value calibrated against the spectral
    backend.
    """
    u = np.asarray(u, dtype=float)
    _check_decay(u)
    if constant is None:
        constant = calibrated_constant(order)
    n = u.shape[-1]
    stencil = singular_stencil(n, float(dx), float(order))
    rows = u.reshape(-1, n)
    step = max(1, MAX_ROW_ENTRIES // n)
    out = np.empty_like(rows)
    for start in range(0, rows.shape[0], step):
        block = rows[start:start + step]
        out[start:start + step] = fftconvolve(block, stencil[None, :], mode="same", axes=-1)
    return constant * out.reshape(u.shape)


@dataclass(frozen=True)
class SingularCalibration:
    order: float
    constant: float
    closed_form: float
    relative_gap: float
    backend_agreement: float
    points: int
    half_width: float

    def describe(self) -> dict:
        return {
            "order": self.order,
            "constant": self.constant,
            "closed_form": self.closed_form,
            "points": self.points,
            "half_width": self.half_width,
        }


def reference_wavelet(x: np.ndarray) -> np.ndarray:
    """(1 - x^2) exp(-x^2 / 2): zero mass and first moment, so D^s of it decays fast."""
    return (1.0 - x**2) * np.exp(-0.5 * x**2)


def calibrate_singular_constant(
    order: float = DEFAULT_ORDER,
    points: int = 1024,
    half_width: float = 16.0,
) -> SingularCalibration:
    """
    Least-squares fit of c_s so the stencil matches the spectral multiplier
    |xi|^s on the reference wavelet.
    """
    x = np.linspace(-half_width, half_width, points, endpoint=False)
    dx = 2.0 * half_width / points
    u = reference_wavelet(x)
    spectral = frac_line_spectral(u, dx, order)
    raw = frac_line_singular(u, dx, order, constant=1.0)
    c = float(np.dot(raw, spectral) / np.dot(raw, raw))
    closed = closed_form_constant(order)
    agreement = float(np.linalg.norm(c * raw - spectral) / np.linalg.norm(spectral))
    logger.debug("singular constant for s=%g: %.12g (closed form %.12g)", order, c, closed)
    return SingularCalibration(
        order=order,
        constant=c,
        closed_form=closed,
        relative_gap=abs(c - closed) / closed,
        backend_agreement=agreement,
        points=points,
        half_width=half_width,
    )


@lru_cache(maxsize=8)
def calibrated_constant(order: float = DEFAULT_ORDER) -> float:
    return calibrate_singular_constant(order).constant


@dataclass
class FracKernelTable:
    """
    D_y^s J tabulated on Gauss nodes in s and w and a uniform y-lattice.

    Beyond the lattice the kernel itself vanishes, so there
    D_y^s J(y) = -c_s * integral of J(y') |y - y'|^(-1-s) dy'. Integrated
    over each half-line outside the lattice this gives the closed tails
    stored in `tail_left` and `tail_right`.
    """

    kernel: KernelId
    order: float
    constant: float
    s: np.ndarray
    s_weights: np.ndarray
    w: np.ndarray
    w_weights: np.ndarray
    y: np.ndarray
    dy: float
    values: np.ndarray = field(repr=False)
    tail_left: np.ndarray = field(repr=False)
    tail_right: np.ndarray = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        return self.s_weights[:, None] * self.w_weights

    @property
    def y_left(self) -> float:
        return float(self.y[0] - 0.5 * self.dy)

    @property
    def y_right(self) -> float:
        return float(self.y[-1] + 0.5 * self.dy)

    def l1_norm(self) -> float:
        """|| D_y^s J ||_{L^1}; the tails are exact for one-signed kernels."""
        inner = np.sum(np.abs(self.values), axis=-1) * self.dy
        total = inner + np.abs(self.tail_left) + np.abs(self.tail_right)
        return float(np.sum(self.weights * total))

    def convolve_at(self, f: AnalyticField, points: PhasePoint) -> np.ndarray:
        """
        T_{D_y^s J} f at a flat point cloud.

        Outside the lattice f is frozen at its value on the lattice ends,
        which is exact for constants and negligible for fields that have
        decayed there.
        """
        if points.t.ndim != 1:
            raise ValueError("convolve_at expects a flat point cloud")
        ns, nw = self.w.shape
        shape = (ns, nw, self.y.size)
        s3 = self.s[:, None, None]
        weights = self.weights
        out = np.empty(points.t.shape[0])
        for p in range(points.t.shape[0]):
            t0, x0, v0 = float(points.t[p]), float(points.x[p, 0]), float(points.v[p, 0])
            t = np.broadcast_to(t0 + s3, shape)
            x = np.broadcast_to(x0 + self.y[None, None, :] + s3 * v0, shape)
            v = np.broadcast_to(v0 + self.w[:, :, None], shape)
            vals = f(PhasePoint(t, x[..., None], v[..., None]))
            body = np.sum(self.values * vals, axis=-1) * self.dy
            ends = []
            for edge in (self.y_left, self.y_right):
                xe = x0 + edge + self.s[:, None] * v0
                ze = PhasePoint(
                    np.broadcast_to(t0 + self.s[:, None], (ns, nw)),
                    np.broadcast_to(xe, (ns, nw))[..., None],
                    (v0 + self.w)[..., None],
                )
                ends.append(f(ze))
            closure = self.tail_left * ends[0] + self.tail_right * ends[1]
            out[p] = float(np.sum(weights * (body - closure)))
        return out


def kernel_frac_dy(
    kid: KernelId,
    nodes: int = 24,
    line_points: int = 512,
    reach: Optional[float] = None,
    order: float = DEFAULT_ORDER,
) -> FracKernelTable:
    """
    Tabulate D_y^s of a scalar d=1 kernel.

    The y-spacing puts `line_points` lattice points across the narrowest
    y-support; the lattice covers four times the widest support and at
    least `reach` on either side.
    """
    if kid.is_vector:
        raise ValueError(f"{kid.label()}: fractional y-derivative tables are built for scalar kernels")
    if nodes < 2 or line_points < 8:
        raise ValueError(f"need nodes >= 2 and line_points >= 8, got {nodes}, {line_points}")
    r = kid.scale
    s, ws = gauss_legendre(nodes, -2.0 * r**2, -(r**2))
    A = np.abs(mat_A(s / r**2, r))
    y_half = A[:, 0, 0] + A[:, 0, 1]
    w_half = A[:, 1, 0] + A[:, 1, 1]
    w, ww = gauss_legendre(nodes, -w_half, w_half)
    dy = 2.0 * float(y_half.min()) / line_points
    extent = max(4.0 * float(y_half.max()), reach or 0.0)
    half = int(math.ceil(extent / dy))
    y = (np.arange(2 * half) - half + 0.5) * dy
    shape = (nodes, nodes, y.size)
    offsets = PhasePoint(
        np.broadcast_to(s[:, None, None], shape),
        np.broadcast_to(y[None, None, :], shape)[..., None],
        np.broadcast_to(w[:, :, None], shape)[..., None],
    )
    raw = kernel_eval(kid, offsets)
    constant = calibrated_constant(order)
    values = frac_line_singular(raw, dy, order, constant)
    y_left = y[0] - 0.5 * dy
    y_right = y[-1] + 0.5 * dy
    scale = constant / order * dy
    tail_right = scale * np.sum(raw * (y_right - y) ** (-order), axis=-1)
    tail_left = scale * np.sum(raw * (y - y_left) ** (-order), axis=-1)
    logger.debug(
        "D_y^%g table for %s: %d x %d nodes, %d y-points, dy=%.4g",
        order, kid.label(), nodes, nodes, y.size, dy,
    )
    return FracKernelTable(kid, order, constant, s, ws, w, ww, y, dy, values, tail_left, tail_right)


def seeded_lines(count: int, seed: int = 0, t_half: float = 1.0, v_half: float = 1.5) -> tuple[tuple[float, float], ...]:
    """(0, 0) followed by `count - 1` uniform (t, v) pairs from a seeded generator."""
    if count < 1:
        raise ValueError(f"need at least one line, got {count}")
    rng = np.random.default_rng(seed)
    tv = rng.uniform((-t_half, -v_half), (t_half, v_half), size=(count - 1, 2))
    return ((0.0, 0.0),) + tuple((float(t), float(v)) for t, v in tv)


def _line_points(t: float, v: float, xs: np.ndarray) -> PhasePoint:
    return PhasePoint(np.full(xs.shape, t), xs[:, None], np.full(xs.shape + (1,), v))


def commute_error(
    kid: KernelId,
    f: AnalyticField,
    lines: Optional[Sequence[tuple[float, float]]] = None,
    samples: int = DEFAULT_LINE_SAMPLES,
    sample_half: float = 2.0,
    nodes: int = 16,
    line_points: int = 256,
    dx: float = 1.0 / 16.0,
) -> float:
    """
    Relative l2 gap between D_x^(1/3) T_J f and T_{D_y^(1/3) J} f at sample
    points on the given (t, v) lines, by default `seeded_lines(DEFAULT_LINE_COUNT)`.

    The left side differentiates T_J f along a long x-line with the
    singular backend; the right side convolves f with the tabulated
    differentiated kernel.
    """
    if lines is None:
        lines = seeded_lines(DEFAULT_LINE_COUNT)
    box = kernel_support_box(kid)
    rule = KernelRule.build(kid, nodes)
    idx_half = int(round(sample_half / dx))
    idx = np.unique(np.round(np.linspace(-idx_half, idx_half, samples)).astype(int))
    xs = idx * dx
    max_v = max(abs(v) for _, v in lines)
    lhs, conv, pts = [], [], []
    for t, v in lines:
        reach = 10.0 + box.y_half + abs(box.s_lo) * (abs(v) + box.w_half)
        n_half = int(math.ceil(reach / dx))
        lattice = np.arange(-n_half, n_half + 1) * dx
        tf = rule.apply(f, _line_points(t, v, lattice))
        picked = tf[idx + n_half]
        peak = float(np.max(np.abs(tf)))
        if np.ptp(tf) <= DECAY_THRESHOLD * max(peak, 1e-300):
            lhs.append(np.zeros(idx.size))
        else:
            lhs.append(frac_line_singular(tf, dx)[idx + n_half])
        conv.append(picked)
        pts.append(_line_points(t, v, xs))
    points = PhasePoint(
        np.concatenate([p.t for p in pts]),
        np.concatenate([p.x for p in pts]),
        np.concatenate([p.v for p in pts]),
    )
    table = kernel_frac_dy(kid, nodes, line_points, reach=10.0 + sample_half + abs(box.s_lo) * max_v)
    rhs = table.convolve_at(f, points)
    lhs = np.concatenate(lhs)
    scale = float(np.linalg.norm(lhs))
    if scale == 0.0:
        scale = float(np.linalg.norm(np.concatenate(conv)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs)) / scale


def commute_check(
    kid: KernelId,
    f: AnalyticField,
    line_count: int = DEFAULT_LINE_COUNT,
    seed: int = 0,
    samples: int = DEFAULT_LINE_SAMPLES,
    nodes: int = 16,
    line_points: int = 256,
    tolerance: float = 1e-3,
) -> VerificationReport:
    """D_x^(1/3) T_J f against T_{D_y^(1/3) J} f on seeded (t, v) lines, passing below `tolerance`."""
    lines = seeded_lines(line_count, seed)
    err = commute_error(kid, f, lines, samples=samples, nodes=nodes, line_points=line_points)
    return bounded_report(
        "field_calculus", "commute_relative_l2", err, tolerance,
        {"kernel": kid.label(), "field": f.name, "nodes": nodes, "line_points": line_points, "lines": len(lines),
         "seed": seed, "samples": samples},
    )
