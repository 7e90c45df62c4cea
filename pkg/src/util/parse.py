"""Parsing utilities for flat key = value configuration text."""

import math
from typing import Any, Iterable, List, Optional, Tuple


def strip_comment(line: str) -> str:
    """Drop everything after the first '#'."""
    return line.split("#", 1)[0].strip()


def parse_key_values(lines: Iterable[str]) -> List[Tuple[int, str, str]]:
    """
    Split configuration lines into (line number, key, raw value).

    Blank lines and comment lines are skipped. Keys are lower-cased with
    '-' folded to '_'.

    Args:
        lines: Text lines, in file order

    Returns:
        Entries with 1-based line numbers

    Raises:
        ValueError: with the line number when a line has no '=' or an empty key
    """
    entries = []
    for number, raw in enumerate(lines, start=1):
        line = strip_comment(raw)
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        if not key:
            raise ValueError(f"{number}: empty key")
        entries.append((number, key, value.strip()))
    return entries


def parse_number(value: Any) -> Optional[float]:
    """
    Parse a float, accepting simple fractions like '1/4' and 'inf'.

    Returns:
        The number, or None if the text is not numeric
    """
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError):
        return None


def parse_int(value: Any) -> Optional[int]:
    """Parse an integer; floats with a fractional part are rejected."""
    number = parse_number(value)
    if number is None or not math.isfinite(number) or number != int(number):
        return None
    return int(number)


def parse_number_list(value: Any) -> Optional[Tuple[float, ...]]:
    """
    Parse a comma-separated list of numbers.

    Returns:
        The numbers as a tuple, or None if any item is not numeric or the list is empty
    """
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [part for part in str(value).split(",") if part.strip()]
    numbers = [parse_number(item) for item in items]
    if not numbers or any(n is None for n in numbers):
        return None
    return tuple(numbers)


def parse_bool(value: Any) -> Optional[bool]:
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    return None
