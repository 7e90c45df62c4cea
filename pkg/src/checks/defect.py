"""Mollification paths and the representation of the mollification defect."""

import math

import numpy as np

from src.config import ExperimentConfig
from src.defect_engine import (
    SPLIT_VARIANTS,
    TransportSplit,
    defect_direct,
    defect_via_representation,
    make_gaussian_split,
    mollify,
    relative_l2,
    representation_channels,
    representation_error,
    transport_residual,
    trajectory_average,
)
from src.field_calculus.fields import AnalyticField, constant_field
from src.kinetic_group import random_points
from src.schema import VerificationReport, bounded_report
from src.util.fitting import convergence_order

EXPERIMENT = "defect"

# Both mollification paths resolve the bump to this many nodes per axis.
PATH_NODES = 64

# (r_nodes, kernel_nodes) for the coarse and the doubled run.
CONVERGENCE_PAIR = ((18, 8), (36, 16))


def constant_split(c: float = 1.5) -> TransportSplit:
    zero = AnalyticField(lambda z: np.zeros(z.t.shape), name="0")
    zero_vector = AnalyticField(lambda z: np.zeros(z.v.shape), components=1, name="0")
    return TransportSplit(constant_field(c), zero_vector, zero, zero, "constant")


def _residual_reports(rng: np.random.Generator) -> list[VerificationReport]:
    points = random_points(rng, 2_000, radius=3.0)
    return [
        bounded_report(EXPERIMENT, "transport_residual", transport_residual(make_gaussian_split(v), points), 1e-12,
                       {"split": v, "samples": 2_000})
        for v in SPLIT_VARIANTS
    ]


def _path_reports(rng: np.random.Generator, count: int) -> list[VerificationReport]:
    f = make_gaussian_split().f
    points = random_points(rng, count, radius=2.0)
    along = mollify(f, 1.0, points, PATH_NODES, path="trajectory")
    kernel = mollify(f, 1.0, points, PATH_NODES, path="kernel")
    reports = [bounded_report(EXPERIMENT, "change_of_variables", relative_l2(kernel, along), 1e-6,
                              {"tau": 1.0, "points": count, "nodes": PATH_NODES})]

    c = 1.5
    flat = trajectory_average(constant_field(c), 1.0, points, PATH_NODES)
    reports.append(bounded_report(EXPERIMENT, "constant_average", float(np.max(np.abs(flat - c))) / c, 1e-6))
    split = constant_split(c)
    direct = defect_direct(split, 1.0, points, PATH_NODES)
    reports.append(bounded_report(EXPERIMENT, "constant_defect", float(np.max(np.abs(direct))) / c, 1e-6))
    rep = defect_via_representation(split, 1.0, points, r_nodes=16, kernel_nodes=8)
    reports.append(bounded_report(EXPERIMENT, "constant_representation", float(np.max(np.abs(rep))), 1e-12))

    first = points[:1]
    gaps = [abs(float(trajectory_average(f, tau, first, PATH_NODES)[0] - f(first)[0])) for tau in (0.2, 0.1, 0.05)]
    reports.append(bounded_report(
        EXPERIMENT, "small_tau_limit", max(gaps[1] / gaps[0], gaps[2] / gaps[1]), 1.0,
        {"taus": [0.2, 0.1, 0.05], "gap": gaps[-1]},
    ))
    return reports


def _representation_reports(cfg: ExperimentConfig) -> list[VerificationReport]:
    cloud = cfg.sample_cloud()
    coverage = cfg.cloud_coverage()
    tolerance = 1e-2 if cfg.quick else 1e-3
    tau0 = cfg.taus[0]
    reports = []
    totals = {}
    for variant in SPLIT_VARIANTS:
        split = make_gaussian_split(variant)
        for tau in cfg.taus:
            channels = representation_channels(split, tau, cloud, cfg.r_nodes, cfg.kernel_nodes)
            total = channels["S0"] + channels["S1"] + channels["vgrad"]
            direct = defect_direct(split, tau, cloud, cfg.quad_nodes)
            params = {"split": variant, "tau": tau, "r_nodes": cfg.r_nodes, "kernel_nodes": cfg.kernel_nodes,
                      **coverage}
            reports.append(bounded_report(EXPERIMENT, "representation_relative_l2", relative_l2(direct, total),
                                          tolerance, params))
            if tau == tau0:
                totals[variant] = total
                reports.append(bounded_report(
                    EXPERIMENT, "S0_channel_norm", float(np.linalg.norm(channels["S0"])), math.inf, params,
                    note="channel weight; no magnitude asserted",
                ))
    reports.append(bounded_report(
        EXPERIMENT, "split_independence", relative_l2(totals["S0-zero"], totals["S0-generic"]), tolerance,
        {"tau": tau0, **coverage},
    ))
    return reports


def _convergence_report(cfg: ExperimentConfig) -> VerificationReport:
    thin = 8 if cfg.quick else 1
    cloud = cfg.sample_cloud()[::thin]
    split = make_gaussian_split("S0-generic")
    (r0, k0), (r1, k1) = CONVERGENCE_PAIR
    coarse = representation_error(split, 1.0, cloud, r0, k0, PATH_NODES)
    fine = representation_error(split, 1.0, cloud, r1, k1, PATH_NODES)
    return bounded_report(
        EXPERIMENT, "representation_refinement", fine / coarse if coarse > 0 else 0.0, 0.5,
        {"coarse": coarse, "fine": fine, "order": convergence_order(coarse, fine) if fine > 0 else math.inf,
         **cfg.cloud_coverage(thin=thin)},
    )


def _decreasing_defect(cfg: ExperimentConfig) -> list[VerificationReport]:
    cloud = cfg.sample_cloud()
    split = make_gaussian_split()
    norms = [float(np.linalg.norm(defect_direct(split, tau, cloud, cfg.quad_nodes))) for tau in (1.0, 0.5, 0.25)]
    return [
        bounded_report(EXPERIMENT, "defect_shrinks_with_tau", max(norms[1] / norms[0], norms[2] / norms[1]), 1.0,
                       {"taus": [1.0, 0.5, 0.25]}),
        bounded_report(EXPERIMENT, "defect_norm", norms[0], math.inf, {"tau": 1.0, **cfg.cloud_coverage()},
                       note="regression value; no magnitude asserted"),
    ]


def run_checks(cfg: ExperimentConfig) -> list[VerificationReport]:
    rng = np.random.default_rng(cfg.seed)
    reports = _residual_reports(rng)
    reports.extend(_path_reports(rng, 30 if cfg.quick else 100))
    reports.extend(_representation_reports(cfg))
    reports.append(_convergence_report(cfg))
    reports.extend(_decreasing_defect(cfg))
    return reports
