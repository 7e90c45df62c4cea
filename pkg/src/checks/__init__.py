"""Verification check families, one per subcommand."""

from typing import Callable

from src.config import ExperimentConfig
from src.schema import VerificationReport

from src.checks.group import run_checks as group_checks
from src.checks.trajectories import run_checks as trajectory_checks
from src.checks.kernels import run_checks as kernel_checks
from src.checks.fields import run_checks as field_checks
from src.checks.maximal import run_checks as maximal_checks
from src.checks.defect import run_checks as defect_checks
from src.checks.besov import run_checks as besov_checks
from src.checks.sobolev import run_checks as sobolev_checks
from src.checks.scaling import run_checks as scaling_checks
from src.checks.balance import run_checks as balance_checks
from src.checks.decay import run_checks as decay_checks


# Registry of check families
# Maps subcommand name -> check function, in the order `all` runs them
CHECKS: dict[str, Callable[[ExperimentConfig], list[VerificationReport]]] = {
    "verify-group": group_checks,
    "verify-trajectories": trajectory_checks,
    "verify-kernels": kernel_checks,
    "verify-fields": field_checks,
    "verify-maximal": maximal_checks,
    "verify-defect": defect_checks,
    "besov": besov_checks,
    "sobolev": sobolev_checks,
    "scaling": scaling_checks,
    "balance": balance_checks,
    "decay": decay_checks,
}


def get_check_names() -> list[str]:
    """Get list of available check family names."""
    return list(CHECKS.keys())
