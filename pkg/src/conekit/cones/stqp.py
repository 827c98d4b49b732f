"""Minimum of a quadratic form over the standard simplex.

The global minimizer of ``z'Mz`` on ``{z >= 0, sum z = 1}`` is a KKT point in
the relative interior of some face.  For every support set ``S`` we solve the
stationarity system ``2 M_SS z_S = lam * 1, 1'z_S = 1`` and keep solutions with
``z_S > 0``.  Supports whose system is singular are skipped: if the system is
singular but consistent, ``z'Mz`` is constant along a null direction of the
KKT matrix, so the same value is reached on a smaller face.  Vertices always
give nonsingular systems, so the enumeration stays complete.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .. import exact

MAX_SIDE = 14


class SimplexMin(NamedTuple):
    value: object
    argmin: np.ndarray


def _check(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    m = M.shape[0]
    if m > MAX_SIDE:
        raise ValueError(f"side {m} exceeds the support-enumeration limit {MAX_SIDE}")
    if m == 0:
        raise ValueError("empty matrix")
    return M, m


def simplex_min_quadratic(M) -> SimplexMin:
    """Return ``min z'Mz`` over the standard simplex and a minimizer.

    Exact (Fraction) input gives an exact value; float input is handled in
    float64.  Ties are broken toward the lexicographically smallest argmin.
    """
    M, m = _check(M)
    if exact.is_exact(M):
        return _exact_min(exact.exact_array(M), m)
    return _float_min(np.asarray(M, dtype=float), m)


def _float_min(M, m) -> SimplexMin:
    if not np.allclose(M, M.T, atol=1e-12 * (1 + np.abs(M).max())):
        raise ValueError("matrix is not symmetric")
    M = (M + M.T) / 2
    best_val = np.inf
    best_z = None
    for r in range(1, m + 1):
        for S in combinations(range(m), r):
            S = list(S)
            K = np.zeros((r + 1, r + 1))
            K[:r, :r] = 2 * M[np.ix_(S, S)]
            K[:r, r] = -1.0
            K[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            if r > 1 and np.linalg.cond(K) > 1e13:
                continue
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            zs = sol[:r]
            if np.any(zs <= 0):
                continue
            z = np.zeros(m)
            z[S] = zs
            val = float(z @ M @ z)
            if val < best_val or (val == best_val and tuple(z) < tuple(best_z)):
                best_val, best_z = val, z
    return SimplexMin(best_val, best_z)


def _exact_min(M, m) -> SimplexMin:
    for i in range(m):
        for j in range(i):
            if M[i, j] != M[j, i]:
                raise ValueError("matrix is not symmetric")
    rows = [[M[i, j] for j in range(m)] for i in range(m)]
    best_val = None
    best_z = None
    for r in range(1, m + 1):
        for S in combinations(range(m), r):
            K = [[2 * rows[i][j] for j in S] + [Fraction(-1)] for i in S]
            K.append([Fraction(1)] * r + [Fraction(0)])
            rhs = [Fraction(0)] * r + [Fraction(1)]
            sol = exact.solve(K, rhs)
            if sol is None:
                continue
            zs = sol[:r]
            if any(v <= 0 for v in zs):
                continue
            # z'Mz = lam/2 at a stationary point with sum z = 1
            val = sol[r] / 2
            z = [Fraction(0)] * m
            for i, v in zip(S, zs):
                z[i] = v
            if best_val is None or val < best_val or (val == best_val and z < best_z):
                best_val, best_z = val, z
    return SimplexMin(best_val, np.array(best_z, dtype=object))
