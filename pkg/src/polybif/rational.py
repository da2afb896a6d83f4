"""Small helpers for exact rational matrices stored as numpy object arrays."""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np


def frac(value) -> Fraction:
    """Parse an int, Fraction, integral float or ``'p/q'`` string exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    raise TypeError(f"cannot convert {value!r} to a rational")


def is_exact(M) -> bool:
    """True when every entry is an int or a Fraction (no floats)."""
    arr = np.asarray(M)
    if arr.dtype.kind in "iub":
        return True
    if arr.dtype.kind == "O":
        return all(isinstance(v, (int, Fraction, np.integer)) for v in arr.flat)
    return False


def to_rational(M) -> np.ndarray:
    arr = np.asarray(M, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = frac(v)
    return out


def to_float(M) -> np.ndarray:
    arr = np.asarray(M, dtype=object)
    return np.array([[float(v) for v in row] for row in arr], dtype=float).reshape(arr.shape)


def eye(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = Fraction(int(i == j))
    return out


def integer_scaled(M) -> tuple[list[list[int]], int]:
    """Return ``(K, c)`` with ``K = c * M`` an integer matrix, ``c > 0`` minimal."""
    R = to_rational(M)
    c = 1
    for v in R.flat:
        c = lcm(c, v.denominator)
    K = [[int(v * c) for v in row] for row in R]
    return K, c


def fmt(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def rref(A) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form over Q. Returns (R without zero rows, pivot columns)."""
    R = to_rational(A).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = next((i for i in range(r, rows) if R[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = R[r] / R[r, c]
        for i in range(rows):
            if i != r and R[i, c] != 0:
                R[i] = R[i] - R[i, c] * R[r]
        pivots.append(c)
        r += 1
    return R[:r], pivots
