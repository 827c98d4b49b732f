"""Exact rational helpers built on :class:`fractions.Fraction`.

Exact matrices are numpy arrays with ``dtype=object`` holding Fractions;
float matrices are ordinary ``float64``/``complex128`` arrays.  Most functions
in the package accept either and keep exact inputs exact.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np


def frac(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Accepts ints, Fractions, floats (converted exactly) and strings such as
    ``"3/4"`` or ``"-2"``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        return Fraction(int(x))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def exact_array(a) -> np.ndarray:
    """Object array of Fractions with the shape of ``a``."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = frac(v)
    return out


def is_exact(a) -> bool:
    arr = np.asarray(a)
    if arr.dtype != object:
        return False
    return all(isinstance(v, (Fraction, int)) for v in arr.flat)


def to_float(a) -> np.ndarray:
    arr = np.asarray(a)
    if np.iscomplexobj(arr) or (arr.dtype == object and any(isinstance(v, complex) for v in arr.flat)):
        return arr.astype(complex)
    return arr.astype(float)


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def identity(n: int) -> np.ndarray:
    out = zeros((n, n))
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def solve(A, b):
    """Solve a square exact system by Gauss-Jordan elimination.

    Returns the solution as a list of Fractions, or ``None`` when ``A`` is
    singular.
    """
    n = len(A)
    rows = [[frac(v) for v in A[i]] + [frac(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        prow = [v / p for v in rows[col]]
        rows[col] = prow
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [v - f * w for v, w in zip(rows[r], prow)]
    return [rows[i][n] for i in range(n)]


def rref(A):
    """Reduced row echelon form of an exact matrix.

    Returns ``(R, pivots)`` where ``R`` is a list of nonzero rows and
    ``pivots`` the pivot column of each.
    """
    rows = [[frac(v) for v in row] for row in A]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(A) -> int:
    return len(rref(A)[1])


def nullspace(A, ncols: int | None = None):
    """Basis of the right nullspace of an exact matrix (list of vectors)."""
    if ncols is None:
        ncols = len(A[0])
    R, pivots = rref(A) if len(A) else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def integer_normalize(v):
    """Scale a rational vector to coprime integers, keeping its sign."""
    from math import gcd, lcm

    v = [frac(x) for x in v]
    den = 1
    for x in v:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [Fraction(0)] * len(v)
    return [Fraction(x // g) for x in ints]
