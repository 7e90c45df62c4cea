"""Kinetic translation group, anisotropic dilations, quasi-norms and kinetic balls.

Points carry a time scalar and two d-vectors. Every operation accepts
clouds of points: `t` may have any shape S, and `x`, `v` then have
shape S + (d,).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dimension:
    """Spatial dimension d and the homogeneous dimension Q = 4d + 2."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")

    @property
    def Q(self) -> int:
        return 4 * self.d + 2


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point (t, x, v) of phase space, or a cloud of such points."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    @classmethod
    def of(cls, t, x, v) -> "PhasePoint":
        """Coerce scalars/sequences; scalar x, v become 1-vectors."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.ndim == t.ndim:
            x = x[..., None]
        if v.ndim == t.ndim:
            v = v[..., None]
        if x.shape != v.shape or x.shape[:-1] != t.shape:
            raise ValueError(f"inconsistent shapes t{t.shape} x{x.shape} v{v.shape}")
        return cls(t, x, v)

    @classmethod
    def origin(cls, d: int = 1) -> "PhasePoint":
        return cls(np.asarray(0.0), np.zeros(d), np.zeros(d))

    @property
    def d(self) -> int:
        return self.x.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.t.shape

    def as_array(self) -> np.ndarray:
        """Flatten to shape S + (1 + 2d,) in (t, x, v) order."""
        return np.concatenate([self.t[..., None], self.x, self.v], axis=-1)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array())))

    def allclose(self, other: "PhasePoint", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=rtol, atol=atol))

    def __getitem__(self, index) -> "PhasePoint":
        return PhasePoint(self.t[index], self.x[index], self.v[index])


def compose(z: PhasePoint, zeta: PhasePoint) -> PhasePoint:
    """(t, x, v) o (s, y, w) = (t + s, x + y + s v, v + w)."""
    return PhasePoint(
        z.t + zeta.t,
        z.x + zeta.x + zeta.t[..., None] * z.v,
        z.v + zeta.v,
    )


def inverse(z: PhasePoint) -> PhasePoint:
    """(t, x, v)^-1 = (-t, -x + t v, -v)."""
    return PhasePoint(-z.t, -z.x + z.t[..., None] * z.v, -z.v)


def dilate(r: float, z: PhasePoint) -> PhasePoint:
    """Kinetic dilation (t, x, v) -> (r^2 t, r^3 x, r v)."""
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    return PhasePoint(r**2 * z.t, r**3 * z.x, r * z.v)


def rho_box(z: PhasePoint) -> np.ndarray:
    """max{|t|^(1/2), |x|^(1/3), |v|}; homogeneous of degree one under dilate."""
    return np.maximum.reduce([
        np.sqrt(np.abs(z.t)),
        np.cbrt(np.linalg.norm(z.x, axis=-1)),
        np.linalg.norm(z.v, axis=-1),
    ])


def rho_kin(z: PhasePoint) -> np.ndarray:
    """Symmetrised quasi-norm rho_box(z) + rho_box(z^-1)."""
    return rho_box(z) + rho_box(inverse(z))


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the Euclidean unit ball in R^d."""
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


def kinetic_ball_volume(r: float, dim: Dimension) -> float:
    """|B_r^kin| = 2 r^2 * omega_d r^(3d) * omega_d r^d."""
    if not r > 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    omega = unit_ball_volume(dim.d)
    return 2.0 * r**2 * omega * r ** (3 * dim.d) * omega * r**dim.d


def random_points(rng: np.random.Generator, count: int, d: int = 1, radius: float = 10.0) -> PhasePoint:
    """Points with rho_box below `radius`, drawn uniformly in the box coordinates."""
    t = rng.uniform(-(radius**2), radius**2, size=count)
    x = rng.uniform(-1.0, 1.0, size=(count, d)) * radius**3 / math.sqrt(d)
    v = rng.uniform(-1.0, 1.0, size=(count, d)) * radius / math.sqrt(d)
    return PhasePoint(t, x, v)


@dataclass(frozen=True)
class QuasiConstants:
    """Measured constants of rho_box on a random sample."""

    triangle: float
    inverse: float
    samples: int

    def kin_comparability(self) -> float:
        """Upper constant in rho_box <= rho_kin <= C rho_box."""
        return 1.0 + self.inverse


def measure_quasi_constants(samples: int = 10_000, d: int = 1, seed: int = 0, radius: float = 10.0) -> QuasiConstants:
    """
    Sample sup of rho_box(z o zeta) / (rho_box(z) + rho_box(zeta)) and of
    rho_box(z^-1) / rho_box(z) over random pairs inside the rho_box ball.
    """
    rng = np.random.default_rng(seed)
    z = random_points(rng, samples, d, radius)
    zeta = random_points(rng, samples, d, radius)
    a = rho_box(z)
    b = rho_box(zeta)
    tri = rho_box(compose(z, zeta)) / (a + b)
    inv = rho_box(inverse(z)) / a
    constants = QuasiConstants(float(np.max(tri)), float(np.max(inv)), samples)
    logger.debug("quasi constants over %d pairs: %s", samples, constants)
    return constants
