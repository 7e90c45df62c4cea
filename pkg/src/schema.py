"""Report schema shared by every verification check."""

import math
from dataclasses import dataclass, field
from typing import Any, Optional


def format_number(x: Optional[float]) -> str:
    """
    Format a measured value for CSV output.

    Returns:
        - "N/A" if x is None
        - "nan" / "inf" / "-inf" for non-finite values
        - repr-style "%.10g" otherwise
    """
    if x is None:
        return "N/A"
    if isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def format_parameters(params: dict[str, Any]) -> str:
    """Render a parameter dict as `key=value;key=value` in insertion order."""
    parts = []
    for key, value in params.items():
        if isinstance(value, float):
            value = format_number(value)
        elif isinstance(value, (list, tuple)):
            value = "/".join(format_number(v) if isinstance(v, float) else str(v) for v in value)
        parts.append(f"{key}={value}")
    return ";".join(parts)


@dataclass
class VerificationReport:
    """One measured quantity with its target, tolerance and verdict."""

    experiment: str
    check: str
    measured: float
    target: Optional[float]
    tolerance: Optional[float]
    passed: bool
    parameters: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    def to_csv_dict(self) -> dict:
        """Convert to dictionary for CSV writing."""
        return {
            "experiment": self.experiment,
            "check": self.check,
            "parameters": format_parameters(self.parameters),
            "measured": format_number(self.measured),
            "target": format_number(self.target),
            "tolerance": format_number(self.tolerance),
            "pass": "1" if self.passed else "0",
        }

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "check": self.check,
            "parameters": {k: _jsonable(v) for k, v in self.parameters.items()},
            "measured": _jsonable(self.measured),
            "target": _jsonable(self.target),
            "tolerance": _jsonable(self.tolerance),
            "pass": bool(self.passed),
            "note": self.note,
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def within(measured: float, target: float, tolerance: float, relative: bool = False) -> bool:
    """|measured - target| <= tolerance (scaled by |target| when relative)."""
    if not math.isfinite(measured):
        return False
    scale = abs(target) if relative and target != 0 else 1.0
    return abs(measured - target) <= tolerance * scale


def bounded_report(
    experiment: str,
    check: str,
    measured: float,
    bound: float,
    parameters: Optional[dict] = None,
    note: str = "",
) -> VerificationReport:
    """Report passing iff measured <= bound."""
    return VerificationReport(
        experiment=experiment,
        check=check,
        measured=float(measured),
        target=float(bound),
        tolerance=0.0,
        passed=bool(math.isfinite(measured) and measured <= bound),
        parameters=parameters or {},
        note=note,
    )


def closeness_report(
    experiment: str,
    check: str,
    measured: float,
    target: float,
    tolerance: float,
    parameters: Optional[dict] = None,
    relative: bool = False,
    note: str = "",
) -> VerificationReport:
    """Report passing iff measured is within tolerance of target."""
    return VerificationReport(
        experiment=experiment,
        check=check,
        measured=float(measured),
        target=float(target),
        tolerance=float(tolerance),
        passed=within(float(measured), float(target), tolerance, relative),
        parameters=parameters or {},
        note=note,
    )


def failed_report(experiment: str, check: str, error: Exception) -> VerificationReport:
    """Report standing in for a check that raised."""
    return VerificationReport(
        experiment=experiment,
        check=check,
        measured=math.nan,
        target=None,
        tolerance=None,
        passed=False,
        note=f"{type(error).__name__}: {error}",
    )


# CSV header columns
CSV_COLUMNS = ["experiment", "check", "parameters", "measured", "target", "tolerance", "pass"]
