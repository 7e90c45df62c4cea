import math

import pytest

from src.config import ExperimentConfig
from src.estimator import (
    CorollaryInputs,
    balance_check,
    balance_lambda,
    check_exponent,
    conjugate_q,
    corollary_check,
    critical_exponent,
    d_branch_exponents,
    family_splits,
    grid_infimum,
    multiplicative_bound,
    objective,
    run_scaling_experiment,
    scaling_targets,
    sigma,
    symmetric_balance_check,
)


def test_exponents():
    assert conjugate_q(2.0) == pytest.approx(1.5)
    assert critical_exponent() == pytest.approx(1.2)
    assert sigma() == pytest.approx(1.0 / 3.0)
    assert d_branch_exponents(1) == pytest.approx((0.5, 0.5))
    with pytest.raises(ValueError):
        conjugate_q(0.5)


def test_exponent_ranges():
    check_exponent(1.2, "besov")
    check_exponent(2.0, "sobolev")
    with pytest.raises(ValueError, match="sobolev needs"):
        check_exponent(1.2, "sobolev")
    with pytest.raises(ValueError, match="besov needs"):
        check_exponent(1.1, "besov")
    with pytest.raises(ValueError, match="inf"):
        check_exponent(math.inf, "besov")


def test_balance_edge_cases():
    no_velocity = balance_lambda(CorollaryInputs(0.0, 0.0, 2.0, 3.0))
    assert no_velocity.objective == 0.0
    no_sources = balance_lambda(CorollaryInputs(0.0, 2.0, 0.0, 0.0))
    assert math.isinf(no_sources.lam)
    assert no_sources.objective == 0.0
    only_c = balance_lambda(CorollaryInputs(0.0, 4.0, 2.0, 0.0))
    assert only_c.lam == 2.0 and only_c.branch == "lambda0"
    only_d = balance_lambda(CorollaryInputs(0.0, 1.0, 0.0, 1.0))
    assert only_d.lam == pytest.approx(1.0) and only_d.branch == "lambda1"
    with pytest.raises(ValueError):
        CorollaryInputs(0.0, -1.0, 1.0, 1.0)


def test_symmetric_case():
    assert symmetric_balance_check().passed
    inputs = CorollaryInputs(0.0, 1.0, 1.0, 1.0)
    assert multiplicative_bound(inputs) == pytest.approx(2.0)
    assert objective(1.0, inputs) == pytest.approx(3.0)


def test_balance_chooses_the_better_candidate():
    inputs = CorollaryInputs(0.0, 2.0, 0.1, 5.0)
    chosen = balance_lambda(inputs)
    lam0 = 2.0 / 0.1
    lam1 = (2.0 / 5.0) ** (1.0 / (inputs.sigma + 1.0 / 3.0))
    assert chosen.objective == pytest.approx(min(objective(lam0, inputs), objective(lam1, inputs)))
    _, inf = grid_infimum(inputs)
    assert chosen.objective <= 3.0 * inf
    assert inf <= chosen.objective * (1.0 + 1e-4)


def test_balance_check_on_random_triples():
    reports = {r.check: r for r in balance_check(samples=30, seed=7)}
    assert reports["closed_form_over_grid_inf"].passed
    assert reports["chosen_minus_rejected"].passed
    assert 0.0 <= reports["proof_rule_agreement"].measured <= 1.0


def test_grid_infimum_needs_sources():
    with pytest.raises(ValueError):
        grid_infimum(CorollaryInputs(0.0, 1.0, 0.0, 0.0))


def test_scaling_targets_and_families():
    targets = scaling_targets(2.0)
    assert targets["frac_dx_f"] == pytest.approx(1.0 / 3.0 - 1.0)
    assert targets["S1"] == pytest.approx(1.0 - 2.0 / 1.5)
    assert len(family_splits("gaussian")) == 2
    assert family_splits("S0-zero")[0].name == "S0-zero"
    with pytest.raises(ValueError, match="family"):
        family_splits("plane-waves")


@pytest.fixture
def small_cfg():
    return ExperimentConfig(grid=16, lambdas=(0.5, 1.0, 2.0))


def test_scaling_slopes_are_exact_on_codilated_grids(small_cfg):
    reports = run_scaling_experiment(small_cfg)
    assert len(reports) == 4
    assert all(r.passed for r in reports), [(r.check, r.measured, r.target) for r in reports]
    with pytest.raises(ValueError, match="three"):
        run_scaling_experiment(ExperimentConfig(grid=16, lambdas=(1.0, 2.0)))


def test_corollary_ratio_is_dilation_invariant(small_cfg):
    reports = {r.check: r for r in corollary_check(small_cfg)}
    assert reports["corollary_scale_invariance"].passed
    assert reports["corollary_ratio"].measured > 0.0
