"""Exact rational parsing and rendering.

Everything in this package is computed over `fractions.Fraction`; floats are
rejected at the boundary so that equality tests (optimum comparisons, duality
gaps, core inequalities) stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import InputError


def parse_rational(value) -> Fraction:
    """Parse an int, Fraction, or string like "4", "7/2", "0.5" into a Fraction.

    Floats are rejected: a JSON literal like 0.1 has no exact binary value and
    would silently poison exact comparisons downstream.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise InputError(
            f"float {value!r} rejected; write rationals as strings like \"7/2\""
        )
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational literal {value!r}") from exc
    raise InputError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    """Render as "num/den" (bare integer when the denominator is 1)."""
    return str(Fraction(q))


def common_denominator(values) -> int:
    """Least common multiple of the denominators of `values` (at least 1)."""
    denom = 1
    for v in values:
        denom = lcm(denom, Fraction(v).denominator)
    return denom
