"""
Phase-space functions.

AnalyticField wraps closed forms that can be evaluated at any point,
which kinetic convolution needs because z o zeta leaves every fixed grid.
GridField holds samples on a uniform box grid and is what norms,
spectral operators and reports consume.
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..kinetic_group import PhasePoint, dilate

logger = logging.getLogger(__name__)

Evaluator = Callable[[PhasePoint], np.ndarray]


@dataclass(frozen=True)
class AnalyticField:
    """
    A closed-form phase-space function with its transport derivative
    (d_t + v . grad_x) f and velocity gradient grad_v f.

    `components` is 0 for scalar fields and d for vector fields, whose
    values carry a trailing axis of length d. Beyond `reach` in any of
    |t|, |x|, |v| the field is treated as zero by quadratures that clip
    their domain.
    """

    value: Evaluator
    transport: Optional[Evaluator] = None
    vgrad: Optional[Evaluator] = None
    components: int = 0
    name: str = "field"
    reach: float = math.inf

    def __call__(self, z: PhasePoint) -> np.ndarray:
        return self.value(z)

    @property
    def is_vector(self) -> bool:
        return self.components > 0

    def transport_at(self, z: PhasePoint) -> np.ndarray:
        if self.transport is None:
            raise ValueError(f"{self.name} has no transport derivative")
        return self.transport(z)

    def vgrad_at(self, z: PhasePoint) -> np.ndarray:
        if self.vgrad is None:
            raise ValueError(f"{self.name} has no velocity gradient")
        return self.vgrad(z)

    def magnitude(self) -> "AnalyticField":
        """|f| (Euclidean magnitude for vector fields); no derivatives."""
        if self.is_vector:
            return AnalyticField(lambda z: np.linalg.norm(self.value(z), axis=-1), name=f"|{self.name}|", reach=self.reach)
        return AnalyticField(lambda z: np.abs(self.value(z)), name=f"|{self.name}|", reach=self.reach)

    def scaled(self, c: float) -> "AnalyticField":
        return AnalyticField(
            lambda z: c * self.value(z),
            None if self.transport is None else (lambda z: c * self.transport(z)),
            None if self.vgrad is None else (lambda z: c * self.vgrad(z)),
            self.components,
            f"{c:g}*{self.name}",
            self.reach,
        )

    def shifted_x(self, h) -> "AnalyticField":
        """z -> f(t, x + h, v)."""
        h = np.atleast_1d(np.asarray(h, dtype=float))

        def move(z: PhasePoint) -> PhasePoint:
            return PhasePoint(z.t, z.x + h, z.v)

        return AnalyticField(
            lambda z: self.value(move(z)),
            None if self.transport is None else (lambda z: self.transport(move(z))),
            None if self.vgrad is None else (lambda z: self.vgrad(move(z))),
            self.components,
            f"{self.name}(x+h)",
            self.reach + float(np.max(np.abs(h))),
        )

    def dilated_tx(self, lam: float, weight: float = 1.0) -> "AnalyticField":
        """
        z -> weight * f(lam t, lam x, v).

        The transport derivative picks up a factor lam; the velocity
        gradient does not.
        """
        if not lam > 0:
            raise ValueError(f"dilation factor must be positive, got {lam}")

        def move(z: PhasePoint) -> PhasePoint:
            return PhasePoint(lam * z.t, lam * z.x, z.v)

        return AnalyticField(
            lambda z: weight * self.value(move(z)),
            None if self.transport is None else (lambda z: weight * lam * self.transport(move(z))),
            None if self.vgrad is None else (lambda z: weight * self.vgrad(move(z))),
            self.components,
            f"{self.name}[lam={lam:g}]",
            self.reach * max(1.0, 1.0 / lam),
        )

    def kinetic_dilated(self, r: float) -> "AnalyticField":
        """
        z -> f(r^2 t, r^3 x, r v).

        Transport picks up r^2 and the velocity gradient r.
        """
        if not r > 0:
            raise ValueError(f"dilation factor must be positive, got {r}")

        def move(z: PhasePoint) -> PhasePoint:
            return dilate(r, z)

        return AnalyticField(
            lambda z: self.value(move(z)),
            None if self.transport is None else (lambda z: r**2 * self.transport(move(z))),
            None if self.vgrad is None else (lambda z: r * self.vgrad(move(z))),
            self.components,
            f"{self.name}[delta={r:g}]",
            self.reach * max(1.0, r**-3),
        )


# Gaussian-enveloped fields are below 1e-15 beyond this.
GAUSSIAN_REACH = 9.0


def _envelope(z: PhasePoint) -> np.ndarray:
    return np.exp(-0.5 * (z.t**2 + np.sum(z.x**2, axis=-1) + np.sum(z.v**2, axis=-1)))


def _xv(z: PhasePoint) -> np.ndarray:
    return np.sum(z.x * z.v, axis=-1)


def gaussian_field(k: float = 0.0) -> AnalyticField:
    """
    exp(-(t^2 + |x|^2 + |v|^2)/2) cos(k x_1).

    Transport derivative -(t + v.x) f - k v_1 G sin(k x_1) with G the
    Gaussian envelope; velocity gradient -v f.
    """

    def value(z):
        return _envelope(z) * np.cos(k * z.x[..., 0])

    def transport(z):
        g = _envelope(z)
        return -(z.t + _xv(z)) * g * np.cos(k * z.x[..., 0]) - k * z.v[..., 0] * g * np.sin(k * z.x[..., 0])

    def vgrad(z):
        return -z.v * value(z)[..., None]

    name = "gaussian" if k == 0 else f"gaussian_cos{k:g}"
    return AnalyticField(value, transport, vgrad, 0, name, GAUSSIAN_REACH)


def gaussian_wavelet_field() -> AnalyticField:
    """
    (1 - x^2) exp(-(t^2 + x^2 + v^2)/2) for d = 1.

    Zero mass and zero first moment along every x-line, so its fractional
    x-derivative decays like |x|^(-10/3).
    """

    def value(z):
        return (1.0 - z.x[..., 0] ** 2) * _envelope(z)

    def transport(z):
        x = z.x[..., 0]
        g = _envelope(z)
        return -z.t * (1.0 - x**2) * g + z.v[..., 0] * (-2.0 * x - x * (1.0 - x**2)) * g

    def vgrad(z):
        return -z.v * value(z)[..., None]

    return AnalyticField(value, transport, vgrad, 0, "gaussian_wavelet", GAUSSIAN_REACH)


def constant_field(c: float) -> AnalyticField:
    def value(z):
        return np.full(z.t.shape, float(c))

    def zero(z):
        return np.zeros(z.t.shape)

    def zero_v(z):
        return np.zeros(z.v.shape)

    return AnalyticField(value, zero, zero_v, 0, f"const{c:g}")


def linear_x_field(slope: float) -> AnalyticField:
    """slope * x_1; transport derivative slope * v_1."""
    return AnalyticField(
        lambda z: slope * z.x[..., 0],
        lambda z: slope * z.v[..., 0],
        lambda z: np.zeros(z.v.shape),
        0,
        f"linear{slope:g}",
    )


def standard_family() -> list[AnalyticField]:
    """Gaussian and its cos(k x) modulations for k in {1, 2, 4}."""
    return [gaussian_field(0.0)] + [gaussian_field(k) for k in (1.0, 2.0, 4.0)]


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform d = 1 box grid over [-T, T) x [-X, X) x [-V, V).

    Axes exclude the right end so the x-axis is a periodic lattice; for
    fields decaying at the box edges the Riemann sum is the trapezoid rule.
    """

    half_widths: tuple[float, float, float] = (8.0, 8.0, 8.0)
    counts: tuple[int, int, int] = (48, 48, 48)

    def __post_init__(self):
        if len(self.half_widths) != 3 or len(self.counts) != 3:
            raise ValueError("grid needs three half-widths and three counts")
        if any(not w > 0 for w in self.half_widths):
            raise ValueError(f"half-widths must be positive, got {self.half_widths}")
        if any(int(n) != n or n < 2 for n in self.counts):
            raise ValueError(f"counts must be integers >= 2, got {self.counts}")

    @classmethod
    def cube(cls, n: int, half_width: float = 8.0) -> "GridSpec":
        return cls((half_width,) * 3, (n,) * 3)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.counts)

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(2.0 * w / n for w, n in zip(self.half_widths, self.counts))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def x_is_power_of_two(self) -> bool:
        n = self.shape[1]
        return n & (n - 1) == 0

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.linspace(-w, w, n, endpoint=False) for w, n in zip(self.half_widths, self.shape))

    def points(self) -> PhasePoint:
        t, x, v = np.meshgrid(*self.axes(), indexing="ij")
        return PhasePoint(t, x[..., None], v[..., None])

    def dilated(self, lam: float) -> "GridSpec":
        """Co-dilated grid for f(lam t, lam x, v): t and x extents shrink by lam."""
        T, X, V = self.half_widths
        return GridSpec((T / lam, X / lam, V), self.counts)

    def kinetic_dilated(self, r: float) -> "GridSpec":
        """Same counts over the box stretched by (r^2, r^3, r)."""
        if not r > 0:
            raise ValueError(f"dilation factor must be positive, got {r}")
        T, X, V = self.half_widths
        return GridSpec((r**2 * T, r**3 * X, r * V), self.counts)

    def with_counts(self, counts: tuple[int, int, int]) -> "GridSpec":
        return replace(self, counts=tuple(counts))

    def sample(self, f: AnalyticField) -> "GridField":
        return GridField(self, np.asarray(f(self.points()), dtype=float))

    def describe(self) -> dict:
        return {"half_widths": list(self.half_widths), "counts": list(self.shape)}


@dataclass
class GridField:
    """Samples in row-major (t, x, v) order, with an optional trailing component axis."""

    grid: GridSpec
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape[:3] != self.grid.shape or self.samples.ndim > 4:
            raise ValueError(f"samples of shape {self.samples.shape} do not fit grid {self.grid.shape}")

    @property
    def components(self) -> int:
        return self.samples.shape[3] if self.samples.ndim == 4 else 0

    def magnitude(self) -> np.ndarray:
        if self.components:
            return np.linalg.norm(self.samples, axis=-1)
        return np.abs(self.samples)

    def _check_same_grid(self, other: "GridField") -> None:
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __sub__(self, other: "GridField") -> "GridField":
        self._check_same_grid(other)
        return GridField(self.grid, self.samples - other.samples)

    def __add__(self, other: "GridField") -> "GridField":
        self._check_same_grid(other)
        return GridField(self.grid, self.samples + other.samples)

    def to_binary(self, path: str | Path) -> None:
        """int64 header (d, n_t, n_x, n_v, components), float64 half-widths, then samples; little-endian."""
        header = np.array([1, *self.grid.shape, self.components], dtype="<i8")
        extents = np.array(self.grid.half_widths, dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(header.tobytes())
            fh.write(extents.tobytes())
            fh.write(np.ascontiguousarray(self.samples, dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path: str | Path) -> "GridField":
        raw = Path(path).read_bytes()
        header = np.frombuffer(raw[:40], dtype="<i8")
        d, nt, nx, nv, comps = (int(e) for e in header)
        if d != 1:
            raise ValueError(f"{path}: only d=1 grids are stored, header says d={d}")
        extents = np.frombuffer(raw[40:64], dtype="<f8")
        shape = (nt, nx, nv) + ((comps,) if comps else ())
        samples = np.frombuffer(raw[64:], dtype="<f8")
        if samples.size != math.prod(shape):
            raise ValueError(f"{path}: expected {math.prod(shape)} samples, found {samples.size}")
        grid = GridSpec(tuple(float(e) for e in extents), (nt, nx, nv))
        return cls(grid, samples.reshape(shape).copy())

    def to_csv_slice(self, path: str | Path, t_index: int, v_index: int) -> None:
        """Write the x-line at fixed (t, v) indices as CSV."""
        t, x, v = self.grid.axes()
        line = self.samples[t_index, :, v_index]
        names = ["value"] if line.ndim == 1 else [f"value_{i}" for i in range(line.shape[-1])]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "v"] + names)
            for i, xi in enumerate(x):
                vals = np.atleast_1d(line[i])
                writer.writerow([f"{t[t_index]:.10g}", f"{xi:.10g}", f"{v[v_index]:.10g}"] + [f"{e:.17g}" for e in vals])


def lp_norm(f: GridField, p: float) -> float:
    """Riemann-sum L^p norm with the grid's cell volume; p = inf is the max."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    mag = f.magnitude()
    if math.isinf(p):
        return float(mag.max())
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def delta_x_h(f, h, grid: Optional[GridSpec] = None):
    """
    f(t, x + h, v) - f(t, x, v).

    AnalyticField input returns an AnalyticField (or its samples on `grid`
    when one is given). GridField input needs h to be a multiple of the
    x-spacing; values shifted in from outside the box are taken as zero.
    """
    if isinstance(f, AnalyticField):
        moved = f.shifted_x(h)
        diff = AnalyticField(
            lambda z: moved(z) - f(z), components=f.components, name=f"delta_h {f.name}", reach=moved.reach
        )
        return diff if grid is None else grid.sample(diff)
    h = float(np.ravel(h)[0])
    dx = f.grid.spacing[1]
    steps = h / dx
    shift = int(round(steps))
    if abs(steps - shift) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError(f"h={h} is not a multiple of the x-spacing {dx}")
    moved = np.zeros_like(f.samples)
    n = f.grid.shape[1]
    if 0 <= shift < n:
        moved[:, : n - shift] = f.samples[:, shift:]
    elif -n < shift < 0:
        moved[:, -shift:] = f.samples[:, : n + shift]
    return GridField(f.grid, moved - f.samples)


def besov_seminorm(f, p: float, h_grid, grid: Optional[GridSpec] = None) -> float:
    """
    max over h in h_grid of ||Delta_x^h f||_p / |h|^(1/3).

    AnalyticField input is differenced exactly and sampled on `grid`;
    GridField input needs every h on the x-lattice.
    """
    hs = [float(h) for h in np.ravel(np.asarray(h_grid, dtype=float))]
    if not hs:
        raise ValueError("h_grid is empty")
    if any(h == 0 for h in hs):
        raise ValueError("h_grid must not contain zero")
    if isinstance(f, AnalyticField) and grid is None:
        raise ValueError("analytic fields need a grid to be sampled on")
    best = 0.0
    for h in hs:
        diff = delta_x_h(f, h, grid)
        best = max(best, lp_norm(diff, p) / abs(h) ** (1.0 / 3.0))
    return best
