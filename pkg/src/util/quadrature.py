"""Gauss-Legendre rules: single interval, tensor boxes, composite panels."""

from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import roots_legendre


@lru_cache(maxsize=64)
def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre(n: int, a, b) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights mapped to [a, b].

    `a` and `b` may be arrays of equal shape; the result then carries a
    trailing axis of length n, one rule per interval.

    Returns:
        (nodes, weights) with shape `np.shape(a) + (n,)`
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    x, w = _reference_rule(int(n))
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def tensor_rule(
    intervals: Sequence[tuple[float, float]],
    n: int | Sequence[int],
) -> tuple[np.ndarray, np.ndarray]:
    """
    Tensor-product rule on a box.

    Args:
        intervals: one (a, b) pair per axis
        n: nodes per axis (scalar or one per axis)

    Returns:
        nodes of shape (N, k) and weights of shape (N,), row-major in the axes
    """
    counts = [n] * len(intervals) if np.isscalar(n) else list(n)
    axes = []
    weights = []
    for (a, b), m in zip(intervals, counts):
        x, w = gauss_legendre(m, a, b)
        axes.append(x)
        weights.append(w)
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    nodes = np.stack([g.ravel() for g in mesh], axis=-1)
    total = np.ones_like(wmesh[0])
    for g in wmesh:
        total = total * g
    return nodes, total.ravel()


def composite_rule(edges: Sequence[float], n_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre over consecutive panels [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("composite rule needs at least two edges")
    x, w = gauss_legendre(n_per_panel, edges[:-1], edges[1:])
    return x.ravel(), w.ravel()


def r_schedule(tau: float, r_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Nodes for integrals over r in (0, tau].

    A third of the nodes sit on dyadic two-point panels inside (0, tau/4],
    the innermost panel reaching down to 0; the rest form one Gauss rule on
    [tau/4, tau].
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if r_nodes < 16:
        raise ValueError(f"r_nodes must be at least 16, got {r_nodes}")
    panels = max(r_nodes // 3, 2) // 2
    inner_edges = [0.0] + [0.25 * tau * 2.0 ** (-(panels - k)) for k in range(1, panels + 1)]
    x_in, w_in = composite_rule(inner_edges, 2)
    x_out, w_out = gauss_legendre(r_nodes - 2 * panels, 0.25 * tau, tau)
    return np.concatenate([x_in, x_out]), np.concatenate([w_in, w_out])


def describe_r_schedule(tau: float, r_nodes: int) -> dict:
    """Summary of the r-node schedule for reports."""
    panels = max(r_nodes // 3, 2) // 2
    return {
        "tau": tau,
        "r_nodes": r_nodes,
        "inner_panels": panels,
        "inner_floor": 0.25 * tau * 2.0 ** (-(panels - 1)),
        "outer_nodes": r_nodes - 2 * panels,
    }


def dyadic_grid(lo_exp: float, hi_exp: float, per_octave: int) -> np.ndarray:
    """Radii 2**k for k evenly spaced in [lo_exp, hi_exp], `per_octave` steps per doubling."""
    if hi_exp < lo_exp:
        raise ValueError(f"empty dyadic range [{lo_exp}, {hi_exp}]")
    steps = int(round((hi_exp - lo_exp) * per_octave))
    return 2.0 ** np.linspace(lo_exp, hi_exp, steps + 1)
