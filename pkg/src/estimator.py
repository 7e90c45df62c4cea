"""
Estimate-level ratio experiments, scaling fits and the lambda-balancing
of the multiplicative bound.

Every sweep runs over anisotropic dilations f_lam(t, x, v) = f(lam t, lam x, v)
sampled on co-dilated grids, so a field and its dilates see the same
samples and only the cell volume and x-spacing change.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .defect_engine import SPLIT_VARIANTS, TransportSplit, make_gaussian_split, rescale_split, transport_residual
from .field_calculus.fields import GridSpec, besov_seminorm, lp_norm
from .field_calculus.spectral import LP_BAND_LIMIT, frac_dx, lp_equivalence_band
from .kinetic_group import Dimension
from .schema import VerificationReport, bounded_report, closeness_report
from .util.fitting import loglog_slope, ratio_band, spearman_trend
from .util.quadrature import dyadic_grid

logger = logging.getLogger(__name__)

# Acceptance for unquantified constants: bounded band, no growth trend.
BAND_LIMIT = 10.0
TREND_LIMIT = 0.8

# Besov differences at 2^k / lam for k in this range.
BESOV_H_EXPONENTS = (-6, 3)


def conjugate_q(p: float, d: int = 1) -> float:
    """q with 1/q = 1/p + 1/Q."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    Q = Dimension(d).Q
    return 1.0 / (1.0 / p + 1.0 / Q)


def critical_exponent(d: int = 1) -> float:
    """Q / (Q - 1), the smallest admissible p."""
    Q = Dimension(d).Q
    return Q / (Q - 1.0)


def check_exponent(p: float, experiment: str, d: int = 1) -> None:
    """Besov admits p >= Q/(Q-1); Sobolev needs p > Q/(Q-1). p = inf is not swept."""
    p_min = critical_exponent(d)
    if math.isinf(p):
        raise ValueError("p = inf is not supported by the sampled sweeps")
    if experiment == "besov" and p < p_min - 1e-12:
        raise ValueError(f"besov needs p >= {p_min:g}, got {p}")
    if experiment != "besov" and p <= p_min + 1e-12:
        raise ValueError(f"{experiment} needs p > {p_min:g}, got {p}")


def sigma(d: int = 1) -> float:
    """2/3 - (d + 1)/Q."""
    return 2.0 / 3.0 - (d + 1.0) / Dimension(d).Q


@dataclass(frozen=True)
class CorollaryInputs:
    """A = ||D_x^(1/3) f||_p, B = ||grad_v f||_p, C = ||S0||_p, D = ||S1||_q."""

    A: float
    B: float
    C: float
    D: float
    d: int = 1

    def __post_init__(self):
        for name in ("A", "B", "C", "D"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be a nonnegative norm, got {value}")

    @property
    def sigma(self) -> float:
        return sigma(self.d)


@dataclass(frozen=True)
class Balance:
    lam: float
    objective: float
    branch: str
    contribution: float
    proof_branch: str


def objective(lam: float, inputs: CorollaryInputs) -> float:
    """lam^(-1/3) B + lam^(2/3) C + lam^sigma D."""
    lam = np.asarray(lam, dtype=float)
    value = lam ** (-1.0 / 3.0) * inputs.B + lam ** (2.0 / 3.0) * inputs.C + lam**inputs.sigma * inputs.D
    return float(value) if value.ndim == 0 else value


def d_branch_exponents(d: int = 1) -> tuple[float, float]:
    """Exponents of B and D in the S1 branch of the multiplicative bound."""
    den = 3.0 * (3 * d + 1)
    return (5 * d + 1) / den, 2.0 * (2 * d + 1) / den


def multiplicative_bound(inputs: CorollaryInputs) -> float:
    """B^(2/3) C^(1/3) + B^a D^b."""
    a, b = d_branch_exponents(inputs.d)
    return inputs.B ** (2.0 / 3.0) * inputs.C ** (1.0 / 3.0) + inputs.B**a * inputs.D**b


def balance_lambda(inputs: CorollaryInputs) -> Balance:
    """
    Choose lam for the objective from the two balancing candidates
    lam0 = B/C and lam1 = (B/D)^(1/(sigma + 1/3)).

    With both sources present the candidate with the smaller objective is
    taken; `proof_branch` records the comparison rule (lam0 when
    lam0 <= lam1), which lands within a factor 3 of the infimum as well.
    """
    B, C, D = inputs.B, inputs.C, inputs.D
    a, b = d_branch_exponents(inputs.d)
    if B == 0:
        return Balance(0.0, 0.0, "B-zero", 0.0, "B-zero")
    if C == 0 and D == 0:
        return Balance(math.inf, 0.0, "sources-zero", 0.0, "sources-zero")
    lam0 = B / C if C > 0 else math.inf
    lam1 = (B / D) ** (1.0 / (inputs.sigma + 1.0 / 3.0)) if D > 0 else math.inf
    c0 = B ** (2.0 / 3.0) * C ** (1.0 / 3.0)
    c1 = B**a * D**b
    if D == 0:
        return Balance(lam0, objective(lam0, inputs), "lambda0", c0, "lambda0")
    if C == 0:
        return Balance(lam1, objective(lam1, inputs), "lambda1", c1, "lambda1")
    proof = "lambda0" if lam0 <= lam1 else "lambda1"
    g0, g1 = objective(lam0, inputs), objective(lam1, inputs)
    if g0 <= g1:
        return Balance(lam0, g0, "lambda0", c0, proof)
    return Balance(lam1, g1, "lambda1", c1, proof)


def grid_infimum(inputs: CorollaryInputs, points: int = 1000, decades: float = 3.0) -> tuple[float, float]:
    """
    Brute-force (lam, objective) minimum over a log-lam grid spanning
    `decades` beyond the balancing candidates on both sides.
    """
    anchors = []
    if inputs.C > 0:
        anchors.append(inputs.B / inputs.C)
    if inputs.D > 0:
        anchors.append((inputs.B / inputs.D) ** (1.0 / (inputs.sigma + 1.0 / 3.0)))
    if not anchors or inputs.B == 0:
        raise ValueError("grid infimum needs B > 0 and a nonzero source")
    lo = math.log10(min(anchors)) - decades
    hi = math.log10(max(anchors)) + decades
    lams = np.logspace(lo, hi, points)
    values = objective(lams, inputs)
    k = int(np.argmin(values))
    return float(lams[k]), float(values[k])


def balance_check(samples: int = 100, seed: int = 0, factor: float = 3.0) -> list[VerificationReport]:
    """Closed-form balancing against the brute-force infimum on random (B, C, D)."""
    rng = np.random.default_rng(seed)
    triples = 10.0 ** rng.uniform(-2.0, 2.0, size=(samples, 3))
    worst = 0.0
    regret = 0.0
    agree = 0
    for B, C, D in triples:
        inputs = CorollaryInputs(0.0, B, C, D)
        chosen = balance_lambda(inputs)
        _, inf = grid_infimum(inputs)
        worst = max(worst, chosen.objective / inf)
        other = B / C if chosen.branch == "lambda1" else (B / D) ** (1.0 / (inputs.sigma + 1.0 / 3.0))
        regret = max(regret, chosen.objective - objective(other, inputs))
        agree += chosen.branch == chosen.proof_branch
    params = {"samples": samples, "seed": seed}
    return [
        bounded_report("balance", "closed_form_over_grid_inf", worst, factor, params),
        bounded_report("balance", "chosen_minus_rejected", regret, 0.0, params),
        VerificationReport(
            "balance", "proof_rule_agreement", agree / samples, None, None, True, params,
            note="observational: share of triples where the lam0 <= lam1 rule picks the same candidate",
        ),
    ]


def symmetric_balance_check() -> VerificationReport:
    """B = C = 1, D = 0 balances at lam = 1 with contribution 1."""
    chosen = balance_lambda(CorollaryInputs(0.0, 1.0, 1.0, 0.0))
    err = max(abs(chosen.lam - 1.0), abs(chosen.contribution - 1.0))
    return bounded_report("balance", "symmetric_case", err, 1e-15, {"branch": chosen.branch})


def family_splits(family: str) -> list[TransportSplit]:
    if family == "gaussian":
        return [make_gaussian_split(v) for v in SPLIT_VARIANTS]
    if family in SPLIT_VARIANTS:
        return [make_gaussian_split(family)]
    raise ValueError(f"unknown field family {family!r}; expected 'gaussian' or one of {SPLIT_VARIANTS}")


def source_norms(split: TransportSplit, grid: GridSpec, p: float, d: int = 1) -> tuple[float, float, float]:
    """(||grad_v f||_p, ||S0||_p, ||S1||_q) on the grid."""
    q = conjugate_q(p, d)
    return (
        lp_norm(grid.sample(split.vgrad), p),
        lp_norm(grid.sample(split.S0), p),
        lp_norm(grid.sample(split.S1), q),
    )


def corollary_inputs(split: TransportSplit, grid: GridSpec, p: float) -> CorollaryInputs:
    """(A, B, C, D) of a split; the grid's x-axis must be a power of two."""
    A = lp_norm(frac_dx(grid.sample(split.f)), p)
    B, C, D = source_norms(split, grid, p)
    return CorollaryInputs(A, B, C, D)


def _sweep_reports(
    experiment: str, split: TransportSplit, lambdas: Sequence[float], ratios: list[float], params: dict
) -> list[VerificationReport]:
    live = [(lam, r) for lam, r in zip(lambdas, ratios) if r is not None]
    params = {**params, "split": split.name, "lambdas": [lam for lam, _ in live]}
    if not live:
        return [VerificationReport(experiment, "ratio_band", 0.0, BAND_LIMIT, 0.0, True, params, note="all ratios 0/0")]
    lams, values = zip(*live)
    if any(math.isinf(v) for v in values):
        return [VerificationReport(experiment, "ratio_band", math.inf, BAND_LIMIT, 0.0, False, params, note="zero right-hand side")]
    reports = [
        bounded_report(experiment, "ratio_max", max(values), math.inf, params, note="observational maximum"),
        bounded_report(experiment, "ratio_band", ratio_band(values), BAND_LIMIT, params),
        bounded_report(experiment, "ratio_trend", spearman_trend(lams, values), TREND_LIMIT, params),
    ]
    logger.debug("%s ratios for %s: %s", experiment, split.name, values)
    return reports


def _ratio(lhs: float, rhs: float):
    if rhs == 0:
        return None if lhs == 0 else math.inf
    return lhs / rhs


def rescaled_residuals(split: TransportSplit, lambdas: Sequence[float], cfg: ExperimentConfig) -> VerificationReport:
    """Transport residual of every rescaled split at strided grid points."""
    worst = 0.0
    for lam in lambdas:
        pts = cfg.sample_cloud(cfg.grid_spec().dilated(lam))
        worst = max(worst, transport_residual(rescale_split(split, lam), pts))
    return bounded_report("besov", "rescaled_transport_residual", worst, 1e-10, {"split": split.name, "lambdas": list(lambdas)})


def run_besov_experiment(cfg: ExperimentConfig, p: float | None = None, observational: bool = False) -> list[VerificationReport]:
    """sup_h ||Delta_x^h f||_p / |h|^(1/3) against ||S0||_p + ||grad_v f||_p + ||S1||_q."""
    p = cfg.p if p is None else p
    check_exponent(p, "besov")
    hs = dyadic_grid(*BESOV_H_EXPONENTS, 1)
    base = cfg.grid_spec()
    reports = []
    for split in family_splits(cfg.family):
        ratios = []
        for lam in cfg.lambdas:
            grid = base.dilated(lam)
            scaled = rescale_split(split, lam)
            lhs = besov_seminorm(scaled.f, p, hs / lam, grid)
            ratios.append(_ratio(lhs, sum(source_norms(scaled, grid, p))))
        rows = _sweep_reports("besov", split, cfg.lambdas, ratios, {"p": p, "grid": base.shape})
        if observational:
            for row in rows:
                row.check = f"endpoint_{row.check}"
                row.passed = True
                row.note = "observational at p = Q/(Q-1)"
        reports.extend(rows)
        if not observational:
            reports.append(rescaled_residuals(split, cfg.lambdas, cfg))
    return reports


def run_sobolev_experiment(cfg: ExperimentConfig) -> list[VerificationReport]:
    """||D_x^(1/3) f||_p against the same right-hand side, plus the square-function band."""
    check_exponent(cfg.p, "sobolev")
    base = cfg.spectral_grid()
    reports = []
    for split in family_splits(cfg.family):
        ratios = []
        samples = []
        for lam in cfg.lambdas:
            grid = base.dilated(lam)
            scaled = rescale_split(split, lam)
            sampled = grid.sample(scaled.f)
            samples.append(sampled)
            lhs = lp_norm(frac_dx(sampled), cfg.p)
            ratios.append(_ratio(lhs, sum(source_norms(scaled, grid, cfg.p))))
        reports.extend(_sweep_reports("sobolev", split, cfg.lambdas, ratios, {"p": cfg.p, "grid": base.shape}))
        band, _ = lp_equivalence_band(samples, 2.0)
        reports.append(bounded_report("sobolev", "square_function_band", band, LP_BAND_LIMIT, {"split": split.name}))
    return reports


def scaling_targets(p: float, d: int = 1) -> dict[str, float]:
    q = conjugate_q(p, d)
    return {
        "frac_dx_f": 1.0 / 3.0 - (d + 1) / p,
        "grad_v_f": -(d + 1) / p,
        "S0": 1.0 - (d + 1) / p,
        "S1": 1.0 - (d + 1) / q,
    }


def run_scaling_experiment(cfg: ExperimentConfig, tolerance: float = 0.02) -> list[VerificationReport]:
    """Log-log slopes of the four corollary norms against lam."""
    if len(cfg.lambdas) < 3:
        raise ValueError(f"scaling fit needs at least three lambda values, got {len(cfg.lambdas)}")
    split = make_gaussian_split("S0-generic")
    base = cfg.spectral_grid()
    measured = {name: [] for name in scaling_targets(cfg.p)}
    for lam in cfg.lambdas:
        inputs = corollary_inputs(rescale_split(split, lam), base.dilated(lam), cfg.p)
        for name, value in zip(measured, (inputs.A, inputs.B, inputs.C, inputs.D)):
            measured[name].append(value)
    reports = []
    for name, target in scaling_targets(cfg.p).items():
        slope = loglog_slope(cfg.lambdas, measured[name])
        reports.append(closeness_report(
            "scaling", f"{name}_slope", slope, target, tolerance, {"p": cfg.p, "lambdas": list(cfg.lambdas)},
        ))
    return reports


def corollary_check(cfg: ExperimentConfig, slack: float = 1e-6) -> list[VerificationReport]:
    """A over the multiplicative bound: its value and its invariance under dilation."""
    split = make_gaussian_split("S0-generic")
    base = cfg.spectral_grid()
    ratios = []
    for lam in cfg.lambdas:
        inputs = corollary_inputs(rescale_split(split, lam), base.dilated(lam), cfg.p)
        ratios.append(inputs.A / multiplicative_bound(inputs))
    params = {"p": cfg.p, "lambdas": list(cfg.lambdas)}
    return [
        VerificationReport("balance", "corollary_ratio", ratios[0], None, None, True, params, note="observational"),
        bounded_report("balance", "corollary_scale_invariance", ratio_band(ratios), 1.0 + slack, params),
    ]
