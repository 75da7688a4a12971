"""Exact rationals backed by GMP.

All numeric values in the core path are ``gmpy2.mpq`` instances.  They hash
and compare equal to ``fractions.Fraction``, so either can be fed in.
"""
from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def is_rational_text(text: str) -> bool:
    return bool(_RATIONAL.match(text))


def parse_rational(text: str) -> mpq:
    """Parse ``"p"`` or ``"p/q"`` (q > 0) into an exact rational."""
    if not _RATIONAL.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return mpq(int(num), int(den) if den else 1)


def to_rational(value) -> mpq:
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def fmt(value) -> str:
    """Render as ``"p/q"`` (or ``"p"`` for integers); round-trips via parse_rational."""
    return str(mpq(value))


def decimal(value, digits: int = 12) -> str:
    return f"{float(value):.{digits}g}"
