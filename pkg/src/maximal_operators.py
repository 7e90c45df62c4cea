"""
Maximal operators and the fractional integral on phase space (d = 1).

Averages run over balls {|s| < r^2, |y| < r^3, |w| < r} composed on the
right of the base point. Each quadrature clips its domain to where the
field can be nonzero (see AnalyticField.reach), so large balls stay
resolved when the field is concentrated.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .field_calculus.convolution import KernelRule
from .field_calculus.fields import AnalyticField, GridSpec, gaussian_field
from .kernels import KernelId, size_constants, support_constant
from .kinetic_group import Dimension, PhasePoint, kinetic_ball_volume
from .schema import VerificationReport, bounded_report
from .util.fitting import ratio_band
from .util.quadrature import composite_rule, dyadic_grid, gauss_legendre

logger = logging.getLogger(__name__)

# Surface densities of the rho_box unit sphere faces |s| = 1, |y| = 1, |w| = 1.
FACE_DENSITY = {"s": 2.0, "y": 3.0, "w": 1.0}


def _default_radii() -> tuple[float, ...]:
    return tuple(float(r) for r in dyadic_grid(-4, 4, 8))


@dataclass(frozen=True)
class MaximalConfig:
    """Discretization of sup_{r > 0} and of the fractional integral."""

    r_grid: tuple[float, ...] = field(default_factory=_default_radii)
    ball_nodes: int = 24
    i1_radius: Optional[float] = None
    radial_nodes: int = 6
    face_nodes: int = 16
    core_fraction: float = 0.25

    def __post_init__(self):
        radii = np.asarray(self.r_grid, dtype=float)
        if radii.size == 0:
            raise ValueError("r_grid must not be empty")
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise ValueError("r_grid must be positive and strictly increasing")
        if self.ball_nodes < 2 or self.face_nodes < 2 or self.radial_nodes < 1:
            raise ValueError("node counts too small")

    @classmethod
    def quick(cls) -> "MaximalConfig":
        return cls(tuple(float(r) for r in dyadic_grid(-4, 4, 4)), ball_nodes=12, face_nodes=10, radial_nodes=4)

    @property
    def radii(self) -> np.ndarray:
        return np.asarray(self.r_grid, dtype=float)

    @property
    def i1_limit(self) -> float:
        return float(self.i1_radius) if self.i1_radius is not None else float(self.radii[-1])

    @property
    def grid_step(self) -> float:
        """Largest ratio between consecutive radii."""
        radii = self.radii
        return float(np.max(radii[1:] / radii[:-1])) if radii.size > 1 else 1.0

    def describe(self) -> dict:
        return {
            "r_min": float(self.radii[0]),
            "r_max": float(self.radii[-1]),
            "radii": int(self.radii.size),
            "ball_nodes": self.ball_nodes,
            "i1_radius": self.i1_limit,
        }


def _abs_values(f: AnalyticField, z: PhasePoint) -> np.ndarray:
    vals = f(z)
    return np.linalg.norm(vals, axis=-1) if f.is_vector else np.abs(vals)


def _clip(lo, hi, a, b):
    """[lo, hi] intersected with [a, b]; empty intersections collapse to a point."""
    lo2 = np.maximum(lo, a)
    return lo2, np.maximum(np.minimum(hi, b), lo2)


def _slab(c, k, reach: float):
    """theta-window where |c + k theta| <= reach."""
    c, k = np.broadcast_arrays(np.asarray(c, dtype=float), np.asarray(k, dtype=float))
    flat = k == 0
    k_safe = np.where(flat, 1.0, k)
    with np.errstate(invalid="ignore"):
        e1 = (-reach - c) / k_safe
        e2 = (reach - c) / k_safe
    inside = np.abs(c) <= reach
    lo = np.where(flat, np.where(inside, -np.inf, np.inf), np.minimum(e1, e2))
    hi = np.where(flat, np.where(inside, np.inf, -np.inf), np.maximum(e1, e2))
    return lo, hi


def _single(z: PhasePoint, i: int) -> tuple[float, float, float]:
    return float(z.t[i]), float(z.x[i, 0]), float(z.v[i, 0])


def _flat(z: PhasePoint) -> PhasePoint:
    return PhasePoint(np.reshape(z.t, -1), np.reshape(z.x, (-1, 1)), np.reshape(z.v, (-1, 1)))


def x_averages(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    """Averages of |f(t, x + y, v)| over |y| < r, shape (points, radii)."""
    z = _flat(z)
    radii = cfg.radii
    R = f.reach
    out = np.empty((z.t.shape[0], radii.size))
    for i in range(z.t.shape[0]):
        t0, x0, v0 = _single(z, i)
        lo, hi = _clip(-radii, radii, -R - x0, R - x0)
        y, wy = gauss_legendre(cfg.ball_nodes, lo, hi)
        shape = y.shape
        vals = _abs_values(f, PhasePoint(np.full(shape, t0), (x0 + y)[..., None], np.full(shape + (1,), v0)))
        out[i] = np.sum(wy * vals, axis=-1) / (2.0 * radii)
    return out


def kinetic_averages(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    """
    Averages of |f(z o m)| over m in B_r^kin, shape (points, radii).

    With y' = y + s v the composite point is (t + s, x + y', v + w), and
    for fixed s the y'-range is a shifted interval of the same length.
    """
    z = _flat(z)
    radii = cfg.radii
    n = cfg.ball_nodes
    R = f.reach
    volume = np.array([kinetic_ball_volume(r, Dimension(1)) for r in radii])
    out = np.empty((z.t.shape[0], radii.size))
    for i in range(z.t.shape[0]):
        t0, x0, v0 = _single(z, i)
        s_lo, s_hi = _clip(-(radii**2), radii**2, -R - t0, R - t0)
        s, ws = gauss_legendre(n, s_lo, s_hi)
        cube = radii[:, None] ** 3
        y_lo, y_hi = _clip(s * v0 - cube, s * v0 + cube, -R - x0, R - x0)
        y, wy = gauss_legendre(n, y_lo, y_hi)
        w_lo, w_hi = _clip(-radii, radii, -R - v0, R - v0)
        w, ww = gauss_legendre(n, w_lo, w_hi)
        shape = (radii.size, n, n, n)
        T = np.broadcast_to(t0 + s[:, :, None, None], shape)
        X = np.broadcast_to(x0 + y[:, :, :, None], shape)
        V = np.broadcast_to(v0 + w[:, None, None, :], shape)
        vals = _abs_values(f, PhasePoint(T, X[..., None], V[..., None]))
        weights = ws[:, :, None, None] * wy[:, :, :, None] * ww[:, None, None, :]
        out[i] = np.sum(weights * vals, axis=(1, 2, 3)) / volume
    return out


def maximal_x(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    """Centered Hardy-Littlewood maximal function in x over the configured radii."""
    return np.max(x_averages(f, z, cfg), axis=-1)


def maximal_kin(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    return np.max(kinetic_averages(f, z, cfg), axis=-1)


def maximal_kin1(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    """sup_r r * (average over B_r^kin); grows with the largest radius for non-decaying f."""
    return np.max(cfg.radii * kinetic_averages(f, z, cfg), axis=-1)


def _radial_rule(cfg: MaximalConfig) -> tuple[np.ndarray, np.ndarray, float]:
    rho_min = cfg.core_fraction * float(cfg.radii[0])
    limit = cfg.i1_limit
    if limit <= rho_min:
        raise ValueError(f"I1 radius {limit} below the core radius {rho_min}")
    panels = int(math.ceil(math.log2(limit / rho_min)))
    edges = np.minimum(rho_min * 2.0 ** np.arange(panels + 1), limit)
    edges[-1] = limit
    rho, w = composite_rule(edges, cfg.radial_nodes)
    return rho, w, rho_min


def _face_sum(f: AnalyticField, z0: tuple[float, float, float], rho: np.ndarray, n: int) -> np.ndarray:
    """sum over faces of density * integral of |f(z o m(rho, theta))| d theta, one value per rho."""
    t0, x0, v0 = z0
    R = f.reach
    total = np.zeros_like(rho)
    rho2, rho3 = rho**2, rho**3
    for sigma in (-1.0, 1.0):
        # |theta_s| = 1
        alive = np.abs(t0 + sigma * rho2) <= R
        a_lo, a_hi = _clip(-1.0, 1.0, *_slab(x0 + sigma * rho2 * v0, rho3, R))
        b_lo, b_hi = _clip(-1.0, 1.0, *_slab(v0, rho, R))
        ty, wy = gauss_legendre(n, a_lo, a_hi)
        tw, ww = gauss_legendre(n, b_lo, b_hi)
        T = np.broadcast_to((t0 + sigma * rho2)[:, None, None], (rho.size, n, n))
        X = np.broadcast_to(x0 + rho3[:, None, None] * ty[:, :, None] + (sigma * rho2 * v0)[:, None, None], T.shape)
        V = np.broadcast_to(v0 + rho[:, None, None] * tw[:, None, :], T.shape)
        vals = _abs_values(f, PhasePoint(T, X[..., None], V[..., None]))
        part = np.sum(wy[:, :, None] * ww[:, None, :] * vals, axis=(1, 2))
        total += FACE_DENSITY["s"] * np.where(alive, part, 0.0)

        # |theta_y| = 1
        s_lo, s_hi = _clip(-1.0, 1.0, *_slab(t0, rho2, R))
        s_lo, s_hi = _clip(s_lo, s_hi, *_slab(x0 + sigma * rho3, rho2 * v0, R))
        ts, ws = gauss_legendre(n, s_lo, s_hi)
        tw, ww = gauss_legendre(n, b_lo, b_hi)
        T = np.broadcast_to(t0 + rho2[:, None, None] * ts[:, :, None], (rho.size, n, n))
        X = np.broadcast_to(x0 + (sigma * rho3)[:, None, None] + rho2[:, None, None] * ts[:, :, None] * v0, T.shape)
        V = np.broadcast_to(v0 + rho[:, None, None] * tw[:, None, :], T.shape)
        vals = _abs_values(f, PhasePoint(T, X[..., None], V[..., None]))
        total += FACE_DENSITY["y"] * np.sum(ws[:, :, None] * ww[:, None, :] * vals, axis=(1, 2))

        # |theta_w| = 1
        alive = np.abs(v0 + sigma * rho) <= R
        s_lo, s_hi = _clip(-1.0, 1.0, *_slab(t0, rho2, R))
        ts, ws = gauss_legendre(n, s_lo, s_hi)
        y_lo, y_hi = _clip(-1.0, 1.0, *_slab(x0 + rho2[:, None] * ts * v0, rho3[:, None], R))
        ty, wy = gauss_legendre(n, y_lo, y_hi)
        T = np.broadcast_to(t0 + rho2[:, None, None] * ts[:, :, None], (rho.size, n, n))
        X = np.broadcast_to(x0 + rho3[:, None, None] * ty + rho2[:, None, None] * ts[:, :, None] * v0, T.shape)
        V = np.broadcast_to((v0 + sigma * rho)[:, None, None], T.shape)
        vals = _abs_values(f, PhasePoint(T, X[..., None], V[..., None]))
        part = np.sum(ws[:, :, None] * wy * vals, axis=(1, 2))
        total += FACE_DENSITY["w"] * np.where(alive, part, 0.0)
    return total


def fractional_integral_I1(f: AnalyticField, z: PhasePoint, cfg: MaximalConfig) -> np.ndarray:
    """
    I1 f(z) = integral over rho_box(m) <= radius of |f(z o m)| rho_box(m)^-(Q-1) dm.

    In homogeneous polar coordinates m = (rho^2 a, rho^3 b, rho c) on the
    faces of the unit rho_box sphere, dm = rho^(Q-1) d rho d sigma, so
    the weight cancels and the rho-integrand is bounded. The core
    rho < rho_min contributes rho_min * 48 |f(z)|.
    """
    z = _flat(z)
    rho, w_rho, rho_min = _radial_rule(cfg)
    sphere = 4.0 * 2.0 * sum(FACE_DENSITY.values())
    core = rho_min * sphere * _abs_values(f, z)
    out = np.empty(z.t.shape[0])
    for i in range(z.t.shape[0]):
        g = _face_sum(f, _single(z, i), rho, cfg.face_nodes)
        out[i] = float(np.dot(w_rho, g)) + core[i]
    return out


OPERATORS = {
    "maximal_x": maximal_x,
    "maximal_kin": maximal_kin,
    "maximal_kin1": maximal_kin1,
    "I1": fractional_integral_I1,
}


def sample_points(count: int = 8, seed: int = 0, spread: float = 1.5) -> PhasePoint:
    """Points with coordinates uniform in [-spread, spread], the origin first."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-spread, spread, size=(count, 3))
    pts[0] = 0.0
    return PhasePoint(pts[:, 0], pts[:, 1:2], pts[:, 2:3])


def monotonicity_check(points: PhasePoint, cfg: MaximalConfig) -> list[VerificationReport]:
    """|gaussian_cos2| <= gaussian pointwise, so every operator must preserve the order."""
    low = gaussian_field(2.0)
    high = gaussian_field(0.0)
    reports = []
    for name, op in OPERATORS.items():
        a = op(low, points, cfg)
        b = op(high, points, cfg)
        excess = float(np.max((a - b) / np.maximum(b, 1e-300)))
        reports.append(bounded_report("maximal", f"{name}_monotone_excess", excess, 1e-9, {"points": a.size}))
    return reports


def homogeneity_check(f: AnalyticField, points: PhasePoint, cfg: MaximalConfig, c: float = -3.0) -> list[VerificationReport]:
    """Op(c f) = |c| Op(f) for every operator."""
    scaled = f.scaled(c)
    reports = []
    for name, op in OPERATORS.items():
        base = op(f, points, cfg)
        moved = op(scaled, points, cfg)
        scale = float(np.max(np.abs(base)))
        err = float(np.max(np.abs(moved - abs(c) * base))) / scale if scale > 0 else 0.0
        reports.append(bounded_report("maximal", f"{name}_homogeneity", err, 1e-12, {"c": c, "field": f.name}))
    return reports


def l2_boundedness_check(
    fields: Sequence[AnalyticField],
    grid: GridSpec,
    cfg: MaximalConfig,
    band_limit: float = 10.0,
) -> VerificationReport:
    """||M_kin f||_2 / ||f||_2 on a coarse grid for each field; passes when the band stays below the limit."""
    pts = grid.points()
    flat = _flat(pts)
    ratios = []
    for f in fields:
        mk = maximal_kin(f, flat, cfg)
        base = _abs_values(f, flat)
        ratios.append(float(np.sqrt(np.sum(mk**2) / np.sum(base**2))))
    band = ratio_band(ratios)
    logger.debug("M_kin L2 ratios: %s", ratios)
    return bounded_report(
        "maximal", "M_kin_l2_band", band, band_limit,
        {"fields": len(ratios), "max_ratio": max(ratios), "grid": grid.shape},
    )


def kin1_vs_I1_check(f: AnalyticField, points: PhasePoint, cfg: MaximalConfig, slack: float = 1e-3) -> VerificationReport:
    """
    M_kin1 f <= I1 f / 8 whenever the I1 radius covers every ball: on B_r
    the weight rho^-(Q-1) is at least r^-5 and |B_r| = 8 r^6.
    """
    if cfg.i1_limit < cfg.radii[-1]:
        raise ValueError("I1 radius must cover the largest ball radius")
    m1 = maximal_kin1(f, points, cfg)
    i1 = fractional_integral_I1(f, points, cfg)
    live = i1 > 0
    ratio = float(np.max(m1[live] / i1[live])) if np.any(live) else 0.0
    return bounded_report("maximal", "kin1_over_I1", ratio, 0.125 * (1.0 + slack), {"field": f.name, "points": m1.size})


DOMINATED_KERNELS = {"vec": KernelId.vec, "vec_pi": KernelId.vec_pi, "tilde": KernelId.tilde}


def _magnitude(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values.reshape(values.shape[0], -1) ** 2, axis=-1))


def domination_check(
    h: AnalyticField,
    points: PhasePoint,
    cfg: MaximalConfig,
    radii: Optional[Sequence[float]] = None,
    nodes: int = 16,
) -> list[VerificationReport]:
    """
    Pointwise |T_{J_r} h| <= C M_kin(h) and r^3 |T_{d_y J_r} h| <= C M_kin(h)
    for the vector kernels, with M_kin1 in place of M_kin for the tilde kernel.

    The bound C is built from the measured size and support constants: a
    kernel supported in B_{Cr} with sup |J_r| = c r^-Q gives
    |T_{J_r} h| <= c |B_C| (average over B_{Cr}), and rounding Cr up to the
    next grid radius costs at most grid_step^Q.
    """
    radii = np.asarray(radii if radii is not None else dyadic_grid(-2, 2, 1), dtype=float)
    points = _flat(points)
    Q = Dimension(1).Q
    averages = kinetic_averages(h, points, cfg)
    m_kin = np.max(averages, axis=-1)
    m_kin1 = np.max(cfg.radii * averages, axis=-1)
    live = m_kin > 0
    rounding = cfg.grid_step**Q
    reports = []
    for name, make in DOMINATED_KERNELS.items():
        value_ratio = 0.0
        grad_ratio = 0.0
        value_bound = 0.0
        grad_bound = 0.0
        for r in radii:
            kid = make(float(r))
            C = support_constant(kid)
            if C * r > cfg.radii[-1]:
                raise ValueError(f"{kid.label()} support reaches {C * r:.3g}, beyond the largest ball radius")
            sizes = size_constants(kid)
            ball = kinetic_ball_volume(C, Dimension(1))
            tv = _magnitude(KernelRule.build(kid, nodes).apply(h, points))
            tg = r**3 * _magnitude(KernelRule.gradient(kid, nodes).apply(h, points))
            if kid.size_exponent:
                denom = m_kin1
                value_bound = max(value_bound, sizes["value"] * ball / C * rounding)
                grad_bound = max(grad_bound, sizes["gradient"] * ball / C * rounding)
            else:
                denom = m_kin
                value_bound = max(value_bound, sizes["value"] * ball * rounding)
                grad_bound = max(grad_bound, sizes["gradient"] * ball * rounding)
            if np.any(live):
                value_ratio = max(value_ratio, float(np.max(tv[live] / denom[live])))
                grad_ratio = max(grad_ratio, float(np.max(tg[live] / denom[live])))
        params = {"radii": int(radii.size), "points": int(points.t.shape[0]), "field": h.name}
        reports.append(bounded_report("maximal", f"{name}_domination", value_ratio, value_bound, params))
        reports.append(bounded_report("maximal", f"{name}_gradient_domination", grad_ratio, grad_bound, params))
    return reports
