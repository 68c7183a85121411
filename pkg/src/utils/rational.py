"""Exact rational parsing and formatting for the text formats."""

import re
from fractions import Fraction
from typing import List

from src.exceptions import SpaceFormatError

_RATIONAL_RE = re.compile(r"^\s*(-?[0-9]+)\s*(?:/\s*([0-9]+))?\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; bare numbers and float-looking strings are rejected."""
    if isinstance(text, (bool, int, float)):
        raise SpaceFormatError(f"rationals must be written as 'p/q' strings, got {text!r}")
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise SpaceFormatError(f"cannot read a rational from {text!r}")

    match = _RATIONAL_RE.match(text)
    if not match:
        raise SpaceFormatError(f"invalid rational {text!r}")
    numerator, denominator = match.group(1), match.group(2)
    if denominator is not None and int(denominator) == 0:
        raise SpaceFormatError(f"zero denominator in {text!r}")
    return Fraction(int(numerator), int(denominator) if denominator else 1)


def format_rational(value: Fraction) -> str:
    """Lowest-terms text form: ``"1/2"`` or ``"1"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational_list(text: str) -> List[Fraction]:
    """Parse a comma separated list such as ``"1/3,1/2,1"``."""
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise SpaceFormatError("empty rational list")
    return [parse_rational(item) for item in items]
