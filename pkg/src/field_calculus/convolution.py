"""Kinetic convolution T_J f(z) = integral of J(zeta) f(z o zeta) d zeta."""

import logging
from dataclasses import dataclass

import numpy as np

from ..kernels import KernelId, kernel_eval, kernel_grad_y, kernel_norm, kernel_support_box, require_line, support_rule
from ..kinetic_group import PhasePoint, compose, inverse
from ..schema import VerificationReport, bounded_report
from ..util.quadrature import tensor_rule
from .fields import AnalyticField, GridField, GridSpec, lp_norm

logger = logging.getLogger(__name__)

# Kernel support may reach this many box half-widths before convolution on a grid is refused.
DEFAULT_MARGIN = 4.0

# Upper bound on points x nodes evaluated at once.
MAX_CHUNK_ENTRIES = 4_000_000


def _lift(points: PhasePoint) -> PhasePoint:
    """Add a node axis after the point axis."""
    return PhasePoint(points.t[:, None], points.x[:, None, :], points.v[:, None, :])


@dataclass
class KernelRule:
    """Quadrature nodes over a kernel's support with the kernel (or its y-gradient) folded into the weights."""

    kernel: KernelId
    offsets: PhasePoint
    weighted: np.ndarray

    @classmethod
    def build(cls, kid: KernelId, nodes: int) -> "KernelRule":
        offsets, w = support_rule(kid, nodes)
        vals = kernel_eval(kid, offsets)
        return cls(kid, offsets, w.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals)

    @classmethod
    def gradient(cls, kid: KernelId, nodes: int) -> "KernelRule":
        offsets, w = support_rule(kid, nodes)
        grads = kernel_grad_y(kid, offsets)
        return cls(kid, offsets, w.reshape((-1,) + (1,) * (grads.ndim - 1)) * grads)

    @property
    def size(self) -> int:
        return self.weighted.shape[0]

    def _contract(self, values: np.ndarray, vector_field: bool) -> np.ndarray:
        if not vector_field:
            return np.tensordot(values, self.weighted, axes=([1], [0]))
        if self.weighted.ndim == 2:
            return np.einsum("pnd,nd->p", values, self.weighted)
        if self.weighted.ndim == 1:
            return np.einsum("pnd,n->pd", values, self.weighted)
        raise ValueError("vector fields contract with scalar or vector kernels only")

    def apply(self, f: AnalyticField, points: PhasePoint) -> np.ndarray:
        """T_J f at a flat cloud of points; vector kernels dot vector fields."""
        if points.t.ndim != 1:
            raise ValueError("apply expects a flat point cloud")
        require_line(points.d)
        step = max(1, MAX_CHUNK_ENTRIES // max(self.size, 1))
        out = []
        for start in range(0, points.t.shape[0], step):
            chunk = points[start:start + step]
            values = f(compose(_lift(chunk), self.offsets))
            out.append(self._contract(values, f.is_vector))
        return np.concatenate(out, axis=0) if out else np.zeros((0,))


@dataclass
class FieldRule:
    """
    Quadrature nodes over a scalar field's box with the field folded into
    the weights, for T_J f(z) = integral of f(xi) J(z^-1 o xi) d xi.

    Use it when the kernel support is much wider than the field, where
    nodes over the kernel support would step over the field entirely.
    """

    field_name: str
    nodes: PhasePoint
    weighted: np.ndarray

    @classmethod
    def build(cls, f: AnalyticField, half: float | tuple[float, float, float], nodes: int) -> "FieldRule":
        """Gauss-Legendre nodes over [-T, T] x [-X, X] x [-V, V]; a scalar half-width gives a cube."""
        if f.is_vector:
            raise ValueError(f"{f.name} is a vector field; field-side rules are scalar")
        halves = (half,) * 3 if np.isscalar(half) else tuple(half)
        pts, w = tensor_rule([(-h, h) for h in halves], nodes)
        xi = PhasePoint(pts[:, 0], pts[:, 1:2], pts[:, 2:3])
        return cls(f.name, xi, w * f(xi))

    @property
    def size(self) -> int:
        return self.weighted.shape[0]

    def apply(self, kid: KernelId, points: PhasePoint) -> np.ndarray:
        """T_J f at a flat cloud of points for a scalar kernel J."""
        if points.t.ndim != 1:
            raise ValueError("apply expects a flat point cloud")
        if kid.is_vector:
            raise ValueError(f"{kid.label()} is a vector kernel; field-side rules are scalar")
        require_line(points.d)
        # kernel evaluation carries 2x2 matrices per entry
        step = max(1, MAX_CHUNK_ENTRIES // (4 * self.size))
        out = []
        for start in range(0, points.t.shape[0], step):
            offsets = compose(inverse(_lift(points[start:start + step])), self.nodes)
            shape = offsets.t.shape
            flat = PhasePoint(offsets.t.reshape(-1), offsets.x.reshape(-1, 1), offsets.v.reshape(-1, 1))
            out.append(kernel_eval(kid, flat).reshape(shape) @ self.weighted)
        return np.concatenate(out, axis=0) if out else np.zeros((0,))


def check_margin(kid: KernelId, grid: GridSpec, margin: float = DEFAULT_MARGIN) -> None:
    """Refuse kernels whose support box exceeds `margin` grid half-widths in any coordinate."""
    box = kernel_support_box(kid)
    T, X, V = grid.half_widths
    extents = {"s": (abs(box.s_lo), T), "y": (box.y_half, X), "w": (box.w_half, V)}
    for name, (reach, half) in extents.items():
        if reach > margin * half:
            raise ValueError(
                f"{kid.label()} support reaches {reach:.4g} in {name}, beyond {margin:g} x half-width {half:g}"
            )


def convolve_points(kid: KernelId, f: AnalyticField, points: PhasePoint, quad_nodes: int = 32) -> np.ndarray:
    """T_J f at arbitrary points (any shape S); result has shape S or S + (d,)."""
    if quad_nodes < 8:
        raise ValueError(f"quad_nodes must be at least 8, got {quad_nodes}")
    shape = points.shape
    flat = PhasePoint(points.t.reshape(-1), points.x.reshape(-1, points.d), points.v.reshape(-1, points.d))
    out = KernelRule.build(kid, quad_nodes).apply(f, flat)
    return out.reshape(shape + out.shape[1:])


def kinetic_convolve(
    kid: KernelId,
    f: AnalyticField,
    grid: GridSpec,
    quad_nodes: int = 32,
    margin: float = DEFAULT_MARGIN,
) -> GridField:
    """T_J f sampled on every grid point."""
    check_margin(kid, grid, margin)
    logger.debug("convolving %s with %s on %s at %d nodes", kid.label(), f.name, grid.shape, quad_nodes)
    return GridField(grid, convolve_points(kid, f, grid.points(), quad_nodes))


def _reciprocal(e: float) -> float:
    return 0.0 if np.isinf(e) else 1.0 / e


def young_check(
    kid: KernelId,
    f: AnalyticField,
    grid: GridSpec,
    p: float,
    q: float,
    theta: float,
    quad_nodes: int = 16,
    tolerance: float = 1e-3,
) -> VerificationReport:
    """
    ||T_J f||_q / (||J||_theta ||f||_p), which must not exceed one when
    1/q + 1 = 1/theta + 1/p.
    """
    if abs(_reciprocal(q) + 1.0 - _reciprocal(theta) - _reciprocal(p)) > 1e-12:
        raise ValueError(f"exponents (p={p}, q={q}, theta={theta}) violate 1/q + 1 = 1/theta + 1/p")
    lhs = lp_norm(kinetic_convolve(kid, f, grid, quad_nodes), q)
    rhs = kernel_norm(kid, theta, max(quad_nodes, 32)) * lp_norm(grid.sample(f), p)
    ratio = lhs / rhs if rhs > 0 else 0.0
    return bounded_report(
        "field_calculus", "young_ratio", ratio, 1.0 + tolerance,
        {"kernel": kid.label(), "field": f.name, "p": p, "q": q, "theta": theta},
    )
