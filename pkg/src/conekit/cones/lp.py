"""Exact rational simplex method.

:class:`StandardSimplex` solves ``min c.x  s.t.  A x = b, x >= 0`` with
Bland's rule on a column-stored tableau and keeps ``B^-1`` explicitly, so
columns can be appended after a solve and the method warm-started from the
previous basis.  :func:`lp_solve` wraps it for problems with variable
bounds and inequality rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..exact import frac


class LPError(Exception):
    pass


class LPInfeasible(LPError):
    """The constraint system has no solution."""


class LPUnbounded(LPError):
    """The objective is unbounded over the feasible set."""


_ZERO = Fraction(0)
_ONE = Fraction(1)


class StandardSimplex:
    """Two-phase simplex for ``min c.x, A x = b, x >= 0`` in exact arithmetic.

    Basic variables are stored as ints; ``-(i + 1)`` denotes the artificial
    variable of row ``i``.
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence, c: Sequence):
        self.m = len(b)
        self.sign = [(-1 if frac(bi) < 0 else 1) for bi in b]
        self.rhs = [frac(bi) * s for bi, s in zip(b, self.sign)]
        self.cols: list[list[Fraction]] = []
        self.costs: list[Fraction] = []
        self.binv = [[_ONE if i == j else _ZERO for j in range(self.m)] for i in range(self.m)]
        self.basis = [-(i + 1) for i in range(self.m)]
        self.phase = 1
        self.pivots = 0
        ncols = len(c)
        for j in range(ncols):
            col = [frac(A[i][j]) * self.sign[i] for i in range(self.m)]
            self.cols.append(col)
            self.costs.append(frac(c[j]))

    # -- tableau maintenance -------------------------------------------------

    def add_column(self, a: Sequence, cost) -> int:
        """Append a variable with constraint column ``a``; returns its index."""
        a = [frac(v) * s for v, s in zip(a, self.sign)]
        col = [sum((bi * aj for bi, aj in zip(row, a) if aj), _ZERO) for row in self.binv]
        self.cols.append(col)
        self.costs.append(frac(cost))
        return len(self.cols) - 1

    def _pivot(self, r: int, e: int) -> None:
        ecol = self.cols[e]
        p = ecol[r]
        factors = [ecol[i] for i in range(self.m)]

        def update(col):
            t = col[r] / p
            if t == 0:
                return
            for i in range(self.m):
                if i != r and factors[i]:
                    col[i] -= factors[i] * t
            col[r] = t

        for j, col in enumerate(self.cols):
            if j != e:
                update(col)
        update(self.rhs)
        # binv is row-major; pivot it row-wise
        prow = [v / p for v in self.binv[r]]
        for i in range(self.m):
            if i != r and factors[i]:
                f = factors[i]
                self.binv[i] = [v - f * w for v, w in zip(self.binv[i], prow)]
        self.binv[r] = prow
        self.cols[e] = [_ONE if i == r else _ZERO for i in range(self.m)]
        self.basis[r] = e
        self.pivots += 1

    def _cost(self, var: int) -> Fraction:
        if var < 0:
            return _ONE if self.phase == 1 else _ZERO
        return _ZERO if self.phase == 1 else self.costs[var]

    def duals(self) -> list[Fraction]:
        """Simplex multipliers ``c_B B^-1`` for the original (unflipped) rows."""
        cb = [self._cost(v) for v in self.basis]
        pi = [sum((cb[i] * self.binv[i][k] for i in range(self.m) if cb[i]), _ZERO) for k in range(self.m)]
        return [p * s for p, s in zip(pi, self.sign)]

    def _iterate(self) -> None:
        while True:
            cb = [self._cost(v) for v in self.basis]
            entering = None
            for j, col in enumerate(self.cols):
                cj = self._cost(j)
                red = cj - sum((cb[i] * col[i] for i in range(self.m) if cb[i] and col[i]), _ZERO)
                if red < 0:
                    entering = j
                    break
            if entering is None:
                return
            col = self.cols[entering]
            best = None
            for i in range(self.m):
                if col[i] > 0:
                    ratio = self.rhs[i] / col[i]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise LPUnbounded("objective unbounded")
            self._pivot(best[1], entering)

    def solve(self) -> None:
        """Run phase 1 (if still pending) and phase 2 from the current basis."""
        if self.phase == 1:
            self._iterate()
            infeas = sum((self.rhs[i] for i, v in enumerate(self.basis) if v < 0), _ZERO)
            if infeas > 0:
                raise LPInfeasible("constraint system is infeasible")
            # drive zero-level artificials out where possible
            for i, v in enumerate(self.basis):
                if v < 0:
                    e = next((j for j, col in enumerate(self.cols) if col[i] != 0), None)
                    if e is not None:
                        self._pivot(i, e)
            self.phase = 2
        self._iterate()

    def point(self) -> list[Fraction]:
        x = [_ZERO] * len(self.cols)
        for i, v in enumerate(self.basis):
            if v >= 0:
                x[v] = self.rhs[i]
        return x

    def value(self) -> Fraction:
        return sum((self.costs[v] * self.rhs[i] for i, v in enumerate(self.basis) if v >= 0), _ZERO)


@dataclass(frozen=True)
class BasicOptimum:
    point: list
    value: Fraction
    pivots: int


def lp_solve(equalities=None, var_bounds=None, objective=None, sense: str = "max", inequalities=None) -> BasicOptimum:
    """Optimize a linear objective exactly.

    Parameters
    ----------
    equalities : (A, b) with ``A x = b``; may be None.
    var_bounds : one ``(lo, hi)`` pair per variable, ``None`` for an
        infinite end.  Defaults to ``x >= 0``.
    objective : coefficient vector.
    sense : ``"max"`` or ``"min"``.
    inequalities : optional ``(G, h)`` with ``G x <= h``.

    Raises :class:`LPInfeasible` or :class:`LPUnbounded`.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    A_eq, b_eq = equalities if equalities is not None else ([], [])
    G, h = inequalities if inequalities is not None else ([], [])
    nvar = len(objective)
    if var_bounds is None:
        var_bounds = [(0, None)] * nvar
    if len(var_bounds) != nvar:
        raise ValueError("one bound pair per variable required")
    for row in list(A_eq) + list(G):
        if len(row) != nvar:
            raise ValueError("constraint row length does not match objective")
    if len(A_eq) != len(b_eq) or len(G) != len(h):
        raise ValueError("constraint matrix and right-hand side disagree")

    # x_j = offset_j + sum_k map_j[k] * s_k with s >= 0
    columns: list[list[tuple[int, Fraction]]] = [[] for _ in range(nvar)]
    offset = [_ZERO] * nvar
    nstd = 0
    upper_rows = []  # (std index, hi - lo)
    for j, (lo, hi) in enumerate(var_bounds):
        lo = None if lo is None else frac(lo)
        hi = None if hi is None else frac(hi)
        if lo is not None and hi is not None and hi < lo:
            raise LPInfeasible(f"empty bound interval for variable {j}")
        if lo is not None:
            offset[j] = lo
            columns[j].append((nstd, _ONE))
            if hi is not None:
                upper_rows.append((nstd, hi - lo))
            nstd += 1
        elif hi is not None:
            offset[j] = hi
            columns[j].append((nstd, -_ONE))
            nstd += 1
        else:
            columns[j].append((nstd, _ONE))
            columns[j].append((nstd + 1, -_ONE))
            nstd += 2
    nslack = len(G) + len(upper_rows)
    ntot = nstd + nslack

    def std_row(row):
        out = [_ZERO] * ntot
        shift = _ZERO
        for j, a in enumerate(row):
            a = frac(a)
            if a:
                shift += a * offset[j]
                for k, s in columns[j]:
                    out[k] += a * s
        return out, shift

    A_std, b_std = [], []
    for row, bi in zip(A_eq, b_eq):
        r, shift = std_row(row)
        A_std.append(r)
        b_std.append(frac(bi) - shift)
    for t, (row, hi) in enumerate(zip(G, h)):
        r, shift = std_row(row)
        r[nstd + t] = _ONE
        A_std.append(r)
        b_std.append(frac(hi) - shift)
    for t, (k, width) in enumerate(upper_rows):
        r = [_ZERO] * ntot
        r[k] = _ONE
        r[nstd + len(G) + t] = _ONE
        A_std.append(r)
        b_std.append(width)

    sgn = -1 if sense == "max" else 1
    c_std, _ = std_row([sgn * frac(c) for c in objective])
    const = sum((frac(c) * o for c, o in zip(objective, offset)), _ZERO)

    if not A_std:
        # no rows: optimum at the bound offsets unless some direction improves
        for j in range(ntot):
            if c_std[j] < 0:
                raise LPUnbounded("objective unbounded")
        x = list(offset)
        return BasicOptimum(point=x, value=const, pivots=0)

    simplex = StandardSimplex(A_std, b_std, c_std)
    simplex.solve()
    s = simplex.point()
    x = []
    for j in range(nvar):
        x.append(offset[j] + sum((sk * s[k] for k, sk in columns[j]), _ZERO))
    value = sum((frac(c) * xj for c, xj in zip(objective, x)), _ZERO)
    return BasicOptimum(point=x, value=value, pivots=simplex.pivots)
