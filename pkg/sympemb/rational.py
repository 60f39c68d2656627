"""Exact rational scalars.

Every quantity in the library (capacities, actions, indices, margins) is a
``fractions.Fraction``. Floats are rejected at the boundary; the only
non-rational value is ``INFINITE``, used for unbounded volumes and capacities.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Iterable, Union

from .errors import RationalParseError

Rat = Fraction

# Marker for unbounded quantities; compares above every Fraction.
INFINITE = math.inf

Extended = Union[Fraction, float]


def parse_rat(x: Any, location: str = "") -> Fraction:
    """Convert to an exact rational, rejecting floats.

    Accepted:
      - int, Fraction
      - str: "25", "3/2", "-1", or an exact decimal "3.5"

    Args:
        x: The value to convert.
        location: Where the value came from, reported on failure.
    """
    if isinstance(x, bool):
        raise RationalParseError(x, location)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise RationalParseError(x, location) from None
    raise RationalParseError(x, location)


def parse_rats(values: Iterable[Any], location: str = "") -> tuple[Fraction, ...]:
    return tuple(parse_rat(v, f"{location}[{i}]") for i, v in enumerate(values))


def fmt_rat(x: Extended) -> str:
    """Canonical string form: "p" for integers, "p/q" otherwise, "inf" for INFINITE."""
    if isinstance(x, float):
        if x == INFINITE:
            return "inf"
        raise TypeError(f"float {x} is not an exact scalar")
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_integral(x: Fraction) -> bool:
    return Fraction(x).denominator == 1


def floor(x: Fraction) -> int:
    return math.floor(Fraction(x))


def sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)
