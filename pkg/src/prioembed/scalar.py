"""Exact rational scalars and their string forms.

Scalars are ``fractions.Fraction``. Dense matrices are stored as an integer
numerator array plus one common positive denominator, which keeps exact
arithmetic while letting numpy do the bulk work.
"""
from fractions import Fraction
from math import lcm

import numpy as np

# int64 products must stay below this; larger values fall back to object arrays
_SAFE = 2 ** 62


def to_fraction(x):
    """Parse a scalar from int, Fraction, ``"p/q"`` or decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # floats are taken at their shortest decimal repr, not binary value
        return Fraction(repr(x))
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def format_scalar(x):
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def common_scale(values):
    """Return ``(numerators, scale)`` with ``values[i] == numerators[i] / scale``."""
    fr = [to_fraction(v) for v in values]
    scale = 1
    for f in fr:
        scale = lcm(scale, f.denominator)
    return [f.numerator * (scale // f.denominator) for f in fr], scale


def int_array(rows):
    """Build an int64 array when safe, otherwise an object array of ints."""
    big = 0
    for r in rows:
        for v in r:
            if abs(v) > big:
                big = abs(v)
    dtype = np.int64 if big < 2 ** 31 else object
    return np.array(rows, dtype=dtype)


def fits_product(a_max, b_max):
    return int(a_max) * int(b_max) < _SAFE


def safe_mul(arr, k):
    """Multiply an integer array by an int without silent overflow."""
    k = int(k)
    if arr.dtype != object and (arr.size == 0 or fits_product(np.abs(arr).max(), abs(k))):
        return arr * k
    return arr.astype(object) * k
