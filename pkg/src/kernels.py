"""
The bump psi and the four kinetic kernels.

Every kernel at scale r is a function of the group offset (s, y, w) that
vanishes unless a = s / r^2 lies in (-2, -1) and b = A_a(r)^-1 (y, w)
lies in the unit ball of each velocity-like factor. Integrals over a
kernel use `support_rule`, a nested Gauss-Legendre rule over the exact
support: s on (-2r^2, -r^2), y on the projection of the support
parallelogram, w on the slice allowed by both slab constraints. psi
extended by zero is smooth, so each nested integral is smooth in the
outer variable and the rule converges spectrally.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .kinetic_group import Dimension, PhasePoint, rho_box, unit_ball_volume
from .trajectories import block_apply, mat_A, mat_A_inv, mat_F
from .util.quadrature import composite_rule, gauss_legendre, tensor_rule

logger = logging.getLogger(__name__)


def profile(u):
    """exp(-1/(1 - u^2)) on |u| < 1, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1
    gap = np.where(inside, 1.0 - u**2, 1.0)
    return np.where(inside, np.exp(-1.0 / gap), 0.0)


def profile_slope_over_u(u):
    """profile'(u) / u, smooth through u = 0."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1
    gap = np.where(inside, 1.0 - u**2, 1.0)
    return np.where(inside, -2.0 * np.exp(-1.0 / gap) / gap**2, 0.0)


@dataclass(frozen=True)
class BumpSpec:
    """psi = profile(2a + 3) profile(|b1|) profile(|b2|) / normalization."""

    d: int
    normalization: float

    @classmethod
    def standard(cls, d: int = 1) -> "BumpSpec":
        return _standard_bump(int(d))

    def describe(self) -> dict:
        return {
            "profile": "exp(-1/(1-u^2))",
            "time_factor": "profile(2a+3)",
            "d": self.d,
            "normalization": self.normalization,
        }


@lru_cache(maxsize=8)
def _standard_bump(d: int) -> BumpSpec:
    Dimension(d)
    x, w = composite_rule(np.linspace(-1.0, 1.0, 9), 32)
    line = float(np.sum(w * profile(x)))
    x, w = composite_rule(np.linspace(0.0, 1.0, 9), 32)
    radial = d * unit_ball_volume(d) * float(np.sum(w * profile(x) * x ** (d - 1)))
    bump = BumpSpec(d, 0.5 * line * radial**2)
    logger.debug("bump normalization for d=%d: %.15g", d, bump.normalization)
    return bump


def _bump_for(b: np.ndarray, bump: BumpSpec | None) -> BumpSpec:
    return BumpSpec.standard(b.shape[-1]) if bump is None else bump


def bump_eval(a, b1, b2, bump: BumpSpec | None = None) -> np.ndarray:
    """psi(a, b1, b2); a of shape S, b1 and b2 of shape S + (d,)."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    bump = _bump_for(b1, bump)
    return (
        profile(2.0 * np.asarray(a, dtype=float) + 3.0)
        * profile(np.linalg.norm(b1, axis=-1))
        * profile(np.linalg.norm(b2, axis=-1))
        / bump.normalization
    )


def bump_grad(a, b1, b2, bump: BumpSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(grad_{b1} psi, grad_{b2} psi), each of shape S + (d,)."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    bump = _bump_for(b1, bump)
    n1 = np.linalg.norm(b1, axis=-1)
    n2 = np.linalg.norm(b2, axis=-1)
    time = profile(2.0 * np.asarray(a, dtype=float) + 3.0) / bump.normalization
    p1, p2 = profile(n1), profile(n2)
    g1 = (time * p2 * profile_slope_over_u(n1))[..., None] * b1
    g2 = (time * p1 * profile_slope_over_u(n2))[..., None] * b2
    return g1, g2


def bump_box(d: int = 1) -> list[tuple[float, float]]:
    """Bounding box of supp psi in (a, b1, b2) coordinates."""
    return [(-2.0, -1.0)] + [(-1.0, 1.0)] * (2 * d)


def bump_mass(nodes: int = 64, d: int = 1) -> float:
    """Tensor Gauss-Legendre integral of psi over its bounding box."""
    pts, w = tensor_rule(bump_box(d), nodes)
    return float(np.sum(w * bump_eval(pts[:, 0], pts[:, 1:1 + d], pts[:, 1 + d:])))


class KernelKind(str, Enum):
    MOLLIFIER = "mollifier"
    TILDE = "tilde"
    VEC = "vec"
    VEC_PI = "vec_pi"


@dataclass(frozen=True)
class KernelId:
    """A kernel kind at a positive scale (tau for the mollifier, r otherwise)."""

    kind: KernelKind
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"kernel scale must be positive, got {self.scale}")
        object.__setattr__(self, "kind", KernelKind(self.kind))

    @classmethod
    def mollifier(cls, tau: float) -> "KernelId":
        return cls(KernelKind.MOLLIFIER, float(tau))

    @classmethod
    def tilde(cls, r: float) -> "KernelId":
        return cls(KernelKind.TILDE, float(r))

    @classmethod
    def vec(cls, r: float) -> "KernelId":
        return cls(KernelKind.VEC, float(r))

    @classmethod
    def vec_pi(cls, r: float) -> "KernelId":
        return cls(KernelKind.VEC_PI, float(r))

    @property
    def is_vector(self) -> bool:
        return self.kind in (KernelKind.VEC, KernelKind.VEC_PI)

    @property
    def size_exponent(self) -> int:
        """sup |J_r| scales like r^-(Q - size_exponent)."""
        return 1 if self.kind is KernelKind.TILDE else 0

    def label(self) -> str:
        return f"{self.kind.value}({self.scale:g})"


@dataclass
class _Pullback:
    a: np.ndarray
    inside: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    inv: np.ndarray


def _pullback(kid: KernelId, offset: PhasePoint) -> _Pullback:
    r = kid.scale
    a = offset.t / r**2
    inside = (a > -2.0) & (a < -1.0)
    a_safe = np.where(inside, a, -1.5)
    inv = mat_A_inv(a_safe, r)
    b1, b2 = block_apply(inv, offset.x, offset.v)
    return _Pullback(a_safe, inside, b1, b2, inv)


def _prefactor(kid: KernelId, s: np.ndarray, d: int) -> np.ndarray:
    r = kid.scale
    Q = Dimension(d).Q
    if kid.kind is KernelKind.MOLLIFIER:
        return np.full_like(s, 2.0**d * r**-Q)
    if kid.kind is KernelKind.TILDE:
        return -(2.0 ** (d + 1)) * s * r ** (-Q - 1)
    if kid.kind is KernelKind.VEC:
        return np.full_like(s, -(2.0**d) * r**-Q)
    return 2.0 ** (d + 1) * s * r ** (-Q - 1)


def kernel_eval(kid: KernelId, offset: PhasePoint, bump: BumpSpec | None = None) -> np.ndarray:
    """
    Kernel value at the offsets (s, y, w).

    Scalar kernels return shape S, vector kernels S + (d,). Offsets with
    s / scale^2 outside (-2, -1) give zero.
    """
    d = offset.d
    pb = _pullback(kid, offset)
    pre = np.where(pb.inside, _prefactor(kid, offset.t, d), 0.0)
    if kid.kind is KernelKind.VEC:
        F = mat_F(pb.a, kid.scale)
        psi = bump_eval(pb.a, pb.b1, pb.b2, bump)
        drive = F[..., 0, None] * pb.b1 + F[..., 1, None] * pb.b2
        return (pre * psi)[..., None] * drive
    if kid.kind is KernelKind.VEC_PI:
        g1, g2 = bump_grad(pb.a, pb.b1, pb.b2, bump)
        return pre[..., None] * (g1 * pb.inv[..., 0, 1, None] + g2 * pb.inv[..., 1, 1, None])
    return pre * bump_eval(pb.a, pb.b1, pb.b2, bump)


def kernel_grad_y(kid: KernelId, offset: PhasePoint, bump: BumpSpec | None = None, delta: float | None = None) -> np.ndarray:
    """
    Gradient in the spatial offset y.

    Scalar kernels give shape S + (d,). Vector kernels give the Jacobian
    S + (d, d) with [..., i, k] = d J_i / d y_k. The mollifier, tilde and
    vec kernels use the chain rule through A^-1; vec_pi uses central
    differences with step `delta` (default 1e-4 scale^3).
    """
    d = offset.d
    if kid.kind is KernelKind.VEC_PI:
        return kernel_grad_y_fd(kid, offset, delta or 1e-4 * kid.scale**3, bump)
    pb = _pullback(kid, offset)
    pre = np.where(pb.inside, _prefactor(kid, offset.t, d), 0.0)
    g1, g2 = bump_grad(pb.a, pb.b1, pb.b2, bump)
    dpsi = g1 * pb.inv[..., 0, 0, None] + g2 * pb.inv[..., 1, 0, None]
    if kid.kind is not KernelKind.VEC:
        return pre[..., None] * dpsi
    F = mat_F(pb.a, kid.scale)
    psi = bump_eval(pb.a, pb.b1, pb.b2, bump)
    drive = F[..., 0, None] * pb.b1 + F[..., 1, None] * pb.b2
    ddrive = F[..., 0] * pb.inv[..., 0, 0] + F[..., 1] * pb.inv[..., 1, 0]
    jac = drive[..., :, None] * dpsi[..., None, :] + (psi * ddrive)[..., None, None] * np.eye(d)
    return pre[..., None, None] * jac


def kernel_grad_y_fd(kid: KernelId, offset: PhasePoint, delta: float, bump: BumpSpec | None = None) -> np.ndarray:
    """Central-difference gradient in y, same shapes as `kernel_grad_y`."""
    d = offset.d
    cols = []
    for k in range(d):
        step = np.zeros(d)
        step[k] = delta
        ahead = kernel_eval(kid, PhasePoint(offset.t, offset.x + step, offset.v), bump)
        behind = kernel_eval(kid, PhasePoint(offset.t, offset.x - step, offset.v), bump)
        cols.append((ahead - behind) / (2 * delta))
    return np.stack(cols, axis=-1)


def require_line(d: int) -> None:
    if d != 1:
        raise ValueError(f"kernel quadrature over the exact support is implemented for d=1, got d={d}")


@dataclass(frozen=True)
class SupportBox:
    """Bounding box of a kernel's support in (s, y, w)."""

    s_lo: float
    s_hi: float
    y_half: float
    w_half: float

    def contains(self, offset: PhasePoint, margin: float = 0.0) -> np.ndarray:
        return (
            (offset.t >= self.s_lo - margin) & (offset.t <= self.s_hi + margin)
            & (np.abs(offset.x[..., 0]) <= self.y_half + margin)
            & (np.abs(offset.v[..., 0]) <= self.w_half + margin)
        )


def kernel_support_box(kid: KernelId, samples: int = 513) -> SupportBox:
    """Exact s-range; y and w half-widths as sup over a of the parallelogram extents."""
    r = kid.scale
    a = np.linspace(-2.0, -1.0, samples)
    A = np.abs(mat_A(a, r))
    return SupportBox(
        s_lo=-2.0 * r**2,
        s_hi=-(r**2),
        y_half=float(np.max(A[:, 0, 0] + A[:, 0, 1])),
        w_half=float(np.max(A[:, 1, 0] + A[:, 1, 1])),
    )


def _w_slice(inv: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """w-interval where both rows of A^-1 (y, w) stay in [-1, 1]; inv broadcasts against y."""
    lo = np.full(y.shape, -np.inf)
    hi = np.full(y.shape, np.inf)
    for row in (0, 1):
        cy = inv[..., row, 0]
        cw = inv[..., row, 1]
        cy, cw = np.broadcast_to(cy, y.shape), np.broadcast_to(cw, y.shape)
        flat = np.abs(cw) < 1e-300
        cw_safe = np.where(flat, 1.0, cw)
        e1 = (-1.0 - cy * y) / cw_safe
        e2 = (1.0 - cy * y) / cw_safe
        allowed = np.abs(cy * y) <= 1.0
        lo = np.maximum(lo, np.where(flat, np.where(allowed, -np.inf, np.inf), np.minimum(e1, e2)))
        hi = np.minimum(hi, np.where(flat, np.where(allowed, np.inf, -np.inf), np.maximum(e1, e2)))
    hi = np.maximum(hi, lo)
    dead = ~np.isfinite(lo) | ~np.isfinite(hi)
    return np.where(dead, 0.0, lo), np.where(dead, 0.0, hi)


def support_rule(kid: KernelId, nodes: int) -> tuple[PhasePoint, np.ndarray]:
    """
    Nested Gauss-Legendre rule over the exact support of a d=1 kernel.

    Returns:
        (offsets, weights) with offsets a PhasePoint cloud of nodes**3 points
    """
    if nodes < 2:
        raise ValueError(f"need at least two nodes per axis, got {nodes}")
    r = kid.scale
    s, ws = gauss_legendre(nodes, -2.0 * r**2, -(r**2))
    a = s / r**2
    A = np.abs(mat_A(a, r))
    y_half = A[:, 0, 0] + A[:, 0, 1]
    y, wy = gauss_legendre(nodes, -y_half, y_half)
    inv = mat_A_inv(a, r)[:, None]
    lo, hi = _w_slice(inv, y)
    w, ww = gauss_legendre(nodes, lo, hi)
    weights = ws[:, None, None] * wy[:, :, None] * ww
    shape = weights.shape
    t = np.broadcast_to(s[:, None, None], shape).ravel()
    yy = np.broadcast_to(y[:, :, None], shape).ravel()
    offsets = PhasePoint(t, yy[:, None], w.reshape(-1, 1))
    return offsets, weights.ravel()


def kernel_integral(kid: KernelId, nodes: int = 64) -> np.ndarray:
    """Integral of the kernel (a d-vector for vector kernels)."""
    offsets, w = support_rule(kid, nodes)
    vals = kernel_eval(kid, offsets)
    if kid.is_vector:
        return np.tensordot(w, vals, axes=(0, 0))
    return np.asarray(np.dot(w, vals))


def kernel_mass(tau: float, nodes: int = 64) -> float:
    """Integral of K_tau; equal to one for every tau."""
    return float(kernel_integral(KernelId.mollifier(tau), nodes))


def _magnitude(vals: np.ndarray, vector: bool) -> np.ndarray:
    if not vector:
        return np.abs(vals)
    return np.sqrt(np.sum(vals.reshape(vals.shape[0], -1) ** 2, axis=-1))


def _lebesgue_norm(values: np.ndarray, weights: np.ndarray, theta: float) -> float:
    if theta < 1:
        raise ValueError(f"exponent must be >= 1, got {theta}")
    if math.isinf(theta):
        return float(np.max(values)) if values.size else 0.0
    return float(np.dot(weights, values**theta) ** (1.0 / theta))


def kernel_norm(kid: KernelId, theta: float, nodes: int = 48) -> float:
    """L^theta norm; vector kernels use the Euclidean magnitude."""
    offsets, w = support_rule(kid, nodes)
    return _lebesgue_norm(_magnitude(kernel_eval(kid, offsets), kid.is_vector), w, theta)


def kernel_grad_norm(kid: KernelId, theta: float, nodes: int = 48) -> float:
    """L^theta norm of the y-gradient (Frobenius magnitude for Jacobians)."""
    offsets, w = support_rule(kid, nodes)
    grad = kernel_grad_y(kid, offsets)
    return _lebesgue_norm(_magnitude(grad, True), w, theta)


def _panels(points: list[np.ndarray], nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on consecutive panels between sorted breakpoints (broadcast over leading axes)."""
    edges = np.sort(np.stack(points, axis=-1), axis=-1)
    x, w = gauss_legendre(nodes, edges[..., :-1], edges[..., 1:])
    lead = x.shape[:-2]
    return x.reshape(lead + (-1,)), w.reshape(lead + (-1,))


def kernel_x_difference_norm(kid: KernelId, h: float, theta: float, nodes: int = 32) -> float:
    """
    || J(s, y + h, w) - J(s, y, w) ||_theta over the union of both supports.

    y is split at the four support ends, w at the four slice ends, so the
    integrand is smooth on every panel apart from sign changes.
    """
    h = float(np.ravel(h)[0]) if np.ndim(h) else float(h)
    if h == 0:
        return 0.0
    r = kid.scale
    s, ws = gauss_legendre(nodes, -2.0 * r**2, -(r**2))
    a = s / r**2
    A = np.abs(mat_A(a, r))
    y_half = A[:, 0, 0] + A[:, 0, 1]
    y, wy = _panels([-y_half, y_half, -y_half - h, y_half - h], nodes)
    inv = mat_A_inv(a, r)[:, None]
    lo0, hi0 = _w_slice(inv, y)
    lo1, hi1 = _w_slice(inv, y + h)
    lo0, hi0 = np.where(hi0 > lo0, lo0, lo1), np.where(hi0 > lo0, hi0, lo1)
    lo1, hi1 = np.where(hi1 > lo1, lo1, lo0), np.where(hi1 > lo1, hi1, lo0)
    w, ww = _panels([lo0, hi0, lo1, hi1], nodes)
    weights = ws[:, None, None] * wy[:, :, None] * ww
    shape = weights.shape
    t = np.broadcast_to(s[:, None, None], shape).ravel()
    yy = np.broadcast_to(y[:, :, None], shape).ravel()[:, None]
    vv = w.reshape(-1, 1)
    diff = kernel_eval(kid, PhasePoint(t, yy + h, vv)) - kernel_eval(kid, PhasePoint(t, yy, vv))
    return _lebesgue_norm(_magnitude(diff, kid.is_vector), weights.ravel(), theta)


def support_constant(kid: KernelId, nodes: int = 24) -> float:
    """Smallest C with every node of nonzero kernel value inside B^kin_{C scale}."""
    offsets, _ = support_rule(kid, nodes)
    vals = _magnitude(kernel_eval(kid, offsets), kid.is_vector)
    live = vals > 0
    if not np.any(live):
        return 0.0
    return float(np.max(rho_box(offsets[live]))) / kid.scale


def size_constants(kid: KernelId, nodes: int = 24) -> dict[str, float]:
    """
    sup|J_r| r^(Q - k) and sup|grad_y J_r| r^(Q + 3 - k) over the support
    nodes, with k = 1 for the tilde kernel and 0 otherwise.
    """
    offsets, _ = support_rule(kid, nodes)
    Q = Dimension(offsets.d).Q
    k = kid.size_exponent
    r = kid.scale
    vals = _magnitude(kernel_eval(kid, offsets), kid.is_vector)
    grads = _magnitude(kernel_grad_y(kid, offsets), True)
    return {
        "value": float(vals.max()) * r ** (Q - k),
        "gradient": float(grads.max()) * r ** (Q + 3 - k),
    }


def min_envelope_integral(height: float, weight: float, panels: int = 40, nodes: int = 8) -> float:
    """
    Numerical integral over r in (0, inf) of min{height, weight r^-3}.

    The closed form is 1.5 height^(2/3) weight^(1/3). The integrand is
    split at the knee and integrated on dyadic panels beyond it; the tail
    past the last panel is added in closed form.
    """
    if height <= 0 or weight <= 0:
        raise ValueError("height and weight must be positive")
    knee = (weight / height) ** (1.0 / 3.0)
    x, w = gauss_legendre(nodes, 0.0, knee)
    inner = float(np.sum(w * np.minimum(height, weight * x**-3.0)))
    edges = knee * 2.0 ** np.arange(panels + 1)
    x, w = composite_rule(edges, nodes)
    outer = float(np.sum(w * np.minimum(height, weight * x**-3.0)))
    tail = 0.5 * weight / edges[-1] ** 2
    return inner + outer + tail


def frac_dy_kernel_norm(tau: float, nodes: int = 24, line_points: int = 512) -> float:
    """|| D_y^(1/3) K_tau ||_{L^1}, the quantity decaying like 1/tau."""
    from .field_calculus.singular import kernel_frac_dy

    table = kernel_frac_dy(KernelId.mollifier(tau), nodes, line_points)
    return table.l1_norm()
