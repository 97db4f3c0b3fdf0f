"""Exact rational scalars: parsing, formatting, and decimal rendering."""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = ["frac", "frac_str", "frac_decimal", "common_denominator"]


def frac(value) -> Fraction:
    """Convert a scalar to an exact Fraction.

    Accepts Fraction, int, rational strings like "3/4" or "-2", and finite
    floats (converted by their exact binary value).  NaN and infinities are
    rejected so cost and mass tables stay finite.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational scalar: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise ValueError(f"non-finite value not allowed: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational {value!r}") from exc
    raise ValueError(f"not a rational scalar: {value!r}")


def frac_str(x: Fraction) -> str:
    """Render a Fraction as "p/q" (or "p" when q == 1)."""
    return str(x)


def frac_decimal(x: Fraction, digits: int = 12) -> str:
    """Round-to-nearest decimal rendering with `digits` significant digits."""
    if x == 0:
        return "0"
    return f"{float(x):.{digits}g}"


def common_denominator(values) -> int:
    """Least common multiple of the denominators of an iterable of Fractions."""
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return lcm
