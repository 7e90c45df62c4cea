"""Scaling-exponent fits and trend statistics."""

import math
from typing import Sequence

import numpy as np
from scipy.stats import linregress, spearmanr


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(xs, dtype=float)
    y = np.abs(np.asarray(ys, dtype=float))
    if x.size < 2:
        raise ValueError("slope fit needs at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("slope fit needs positive abscissae and nonzero ordinates")
    return float(linregress(np.log(x), np.log(y)).slope)


def ratio_band(values: Sequence[float]) -> float:
    """max/min of positive values; inf if any value vanishes."""
    v = np.asarray(values, dtype=float)
    lo = float(np.min(v))
    if lo <= 0:
        return math.inf
    return float(np.max(v)) / lo


def spearman_trend(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation; 0 when either sequence is constant."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    rho = spearmanr(x, y)[0]
    return 0.0 if np.isnan(rho) else float(rho)


def convergence_order(err_coarse: float, err_fine: float, factor: float = 2.0) -> float:
    """Observed order from errors at step h and h/factor."""
    if err_coarse <= 0 or err_fine <= 0:
        return math.inf
    return math.log(err_coarse / err_fine) / math.log(factor)
