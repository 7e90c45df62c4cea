"""
Experiment configuration.

Values are layered: built-in defaults, then a flat `key = value` file,
then the environment (KINVERIFY_OUT_DIR, KINVERIFY_WORKERS), then
command-line overrides. q is always derived from p.
"""

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .field_calculus.fields import GridSpec
from .kinetic_group import Dimension, PhasePoint
from .util.parse import parse_bool, parse_int, parse_key_values, parse_number, parse_number_list

logger = logging.getLogger(__name__)

ENV_OUT_DIR = "KINVERIFY_OUT_DIR"
ENV_WORKERS = "KINVERIFY_WORKERS"


class ConfigError(ValueError):
    """Malformed configuration, located by file path and 1-based line."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        self.message = message
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "all"
    grid: int = 48
    half_width: float = 8.0
    p: float = 2.0
    taus: tuple[float, ...] = (1.0,)
    lambdas: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    kernel_nodes: int = 16
    r_nodes: int = 24
    quad_nodes: int = 32
    family: str = "gaussian"
    sample_stride: int = 3
    out_dir: str = "out"
    quick: bool = False
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.grid < 8:
            raise ValueError(f"grid needs at least 8 points per axis, got {self.grid}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.taus or any(not t > 0 for t in self.taus):
            raise ValueError(f"taus must be positive, got {self.taus}")
        if not self.lambdas or any(not lam > 0 for lam in self.lambdas):
            raise ValueError(f"lambdas must be positive, got {self.lambdas}")
        if self.r_nodes < 16:
            raise ValueError(f"r_nodes must be at least 16, got {self.r_nodes}")
        if self.kernel_nodes < 2 or self.quad_nodes < 2:
            raise ValueError("quadrature node counts must be at least 2")
        if self.sample_stride < 1:
            raise ValueError(f"sample_stride must be positive, got {self.sample_stride}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")

    @property
    def q(self) -> float:
        """1/q = 1/p + 1/Q."""
        return 1.0 / (1.0 / self.p + 1.0 / Dimension(1).Q)

    def grid_spec(self) -> GridSpec:
        return GridSpec.cube(self.grid, self.half_width)

    def spectral_grid(self) -> GridSpec:
        """The cube grid with its x-axis raised to a power of two."""
        nx = 1
        while nx < self.grid:
            nx <<= 1
        return GridSpec((self.half_width,) * 3, (self.grid, nx, self.grid))

    def sample_cloud(self, grid: Optional[GridSpec] = None) -> PhasePoint:
        """Every `sample_stride`-th grid point per axis, as a flat cloud."""
        pts = (grid or self.grid_spec()).points()
        s = self.sample_stride
        start = s // 2
        sub = pts[start::s, start::s, start::s]
        return PhasePoint(sub.t.reshape(-1), sub.x.reshape(-1, 1), sub.v.reshape(-1, 1))

    def cloud_coverage(self, grid: Optional[GridSpec] = None, thin: int = 1) -> dict:
        """Which grid indices `sample_cloud` visits, for report payloads."""
        shape = (grid or self.grid_spec()).shape
        s = self.sample_stride
        axes = [list(range(s // 2, n, s)) for n in shape]
        points = len(axes[0]) * len(axes[1]) * len(axes[2])
        covered = len(range(0, points, thin))
        return {
            "grid_shape": list(shape),
            "stride": s,
            "offset": s // 2,
            "thin": thin,
            "points": covered,
            "fraction": covered / float(shape[0] * shape[1] * shape[2]),
        }

    def quick_profile(self) -> "ExperimentConfig":
        """Reduced resolution for smoke runs."""
        return replace(
            self,
            grid=min(self.grid, 32),
            lambdas=(0.5, 1.0, 2.0),
            kernel_nodes=min(self.kernel_nodes, 12),
            r_nodes=min(self.r_nodes, 18),
            quad_nodes=min(self.quad_nodes, 20),
            sample_stride=max(self.sample_stride, 8),
            quick=True,
        )

    def describe(self) -> dict:
        out = asdict(self)
        out["q"] = self.q
        return out


_LISTS = {"taus", "lambdas"}
_INTS = {"grid", "kernel_nodes", "r_nodes", "quad_nodes", "sample_stride", "workers", "seed"}
_FLOATS = {"half_width", "p"}
_BOOLS = {"quick"}
_STRINGS = {"experiment", "family", "out_dir"}
_ALIASES = {"tau": "taus", "lambda": "lambdas", "out": "out_dir"}


def coerce(key: str, value: Any) -> Any:
    """Convert a raw value for `key`; ValueError names the key on failure."""
    key = _ALIASES.get(key, key)
    if key == "q":
        raise ValueError("q is derived from p and cannot be set")
    if key in _LISTS:
        parsed = parse_number_list(value)
    elif key in _INTS:
        parsed = parse_int(value)
    elif key in _FLOATS:
        parsed = parse_number(value)
    elif key in _BOOLS:
        parsed = value if isinstance(value, bool) else parse_bool(value)
    elif key in _STRINGS:
        parsed = str(value).strip() or None
    else:
        raise ValueError(f"unknown key {key!r}")
    if parsed is None:
        raise ValueError(f"bad value for {key}: {value!r}")
    return parsed


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a config file into coerced values; errors carry path:line."""
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror or e}", path) from e
    try:
        entries = parse_key_values(text.splitlines())
    except ValueError as e:
        number, _, message = str(e).partition(": ")
        raise ConfigError(message, path, int(number)) from e
    values = {}
    for number, key, raw in entries:
        try:
            values[_ALIASES.get(key, key)] = coerce(key, raw)
        except ValueError as e:
            raise ConfigError(str(e), path, number) from e
    return values


def env_overrides(env: Mapping[str, str]) -> dict[str, Any]:
    values = {}
    if env.get(ENV_OUT_DIR):
        values["out_dir"] = env[ENV_OUT_DIR]
    if env.get(ENV_WORKERS):
        workers = parse_int(env[ENV_WORKERS])
        if workers is None:
            raise ConfigError(f"{ENV_WORKERS} must be an integer, got {env[ENV_WORKERS]!r}")
        values["workers"] = workers
    return values


def load_config(
    path: Optional[str | Path] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build the configuration from defaults < file < environment < overrides.

    Overrides with value None are ignored. A quick flag from any layer
    applies the quick profile after layering, so explicit values set
    before it are capped by the profile.
    """
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    values.update(env_overrides(os.environ if env is None else env))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[_ALIASES.get(key, key)] = coerce(key, value)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}", None if path is None else str(path))
    try:
        cfg = ExperimentConfig(**values)
    except ValueError as e:
        raise ConfigError(str(e), None if path is None else str(path)) from e
    if cfg.quick:
        cfg = cfg.quick_profile()
    logger.debug("configuration: %s", cfg.describe())
    return cfg
