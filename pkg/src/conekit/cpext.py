"""Completely positive lift of the correlation polytope and the copositive dual.

Binary quadratic optimization ``min a'Qa`` over ``a in {0,1}^n`` is written as
a linear program over the completely positive cone of side ``m = 1 + 2n`` in
the lifted variable ``Y = (1; x; 1-x)(1; x; 1-x)'``.  Index 0 is the
homogenizing coordinate, indices ``1..n`` hold ``x`` and ``n+1..2n`` the
complements.  Its dual asks for the largest ``alpha + 2 sum beta + sum gamma``
such that ``M(alpha, beta, gamma, delta)`` is copositive.  Pairing vertex
lifts with optimal dual matrices factorizes the slack matrix of COR(n) over
the completely positive cone.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import exact
from .cones import ConeOracle, CpCertificate, StandardSimplex, simplex_min_quadratic
from .polytopes import (
    binary_vectors,
    cor_coordinates,
    correlation_polytope,
    facet_enum,
    slack_matrix,
    verify_cone_factorization,
)

DEFAULT_TOL = 1e-6
DEFAULT_COP_TOL = 1e-8
MAX_CUTS = 10_000


class DualSolveError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _sym(Q):
    Q = exact.exact_array(Q)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    return (Q + Q.T) / 2


@dataclass
class FacetInequality:
    """``sum_ij Q_ij y_ij >= kappa`` with symmetric ``Q``."""

    Q: np.ndarray
    kappa: Fraction

    @property
    def n(self):
        return self.Q.shape[0]

    @classmethod
    def from_row(cls, row, rhs, n: int) -> "FacetInequality":
        """Convert a COR(n) inequality ``row . z >= rhs``; off-diagonal coefficients are split in half."""
        Q = exact.zeros((n, n))
        for c, (i, j) in zip(row, cor_coordinates(n)):
            c = exact.frac(c)
            if i == j:
                Q[i, i] = c
            else:
                Q[i, j] = Q[j, i] = c / 2
        return cls(Q, exact.frac(rhs))

    def slack(self, a):
        a = [Fraction(v) for v in a]
        return sum(self.Q[i, j] * a[i] * a[j] for i in range(self.n) for j in range(self.n)) - self.kappa


def kappa(Q, n: int | None = None):
    """``min a'Qa`` over ``{0,1}^n`` and the first minimizer in enumeration order."""
    Q = _sym(Q)
    n = Q.shape[0] if n is None else n
    if n > 20:
        raise ValueError("kappa enumerates 2^n points; n <= 20 required")
    best, arg = None, None
    for a in binary_vectors(n):
        val = sum(Q[i, j] for i in range(n) if a[i] for j in range(n) if a[j])
        val = Fraction(val)
        if best is None or val < best:
            best, arg = val, a
    return best, arg


# -- primal -----------------------------------------------------------------


@dataclass
class BurerPrimal:
    n: int
    objective: np.ndarray
    constraints: list  # (name, A, rhs)

    @property
    def m(self):
        return 1 + 2 * self.n

    def residuals(self, Y):
        Y = np.asarray(Y)
        return [(name, (A * Y).sum() - rhs) for name, A, rhs in self.constraints]

    def is_feasible(self, Y) -> bool:
        return all(r == 0 for _, r in self.residuals(Y))


def _constraint_matrices(n: int):
    m = 1 + 2 * n
    out = []
    A = exact.zeros((m, m))
    A[0, 0] = Fraction(1)
    out.append(("one", A, Fraction(1)))
    for i in range(1, n + 1):
        A = exact.zeros((m, m))
        A[0, i] = A[i, 0] = A[0, n + i] = A[n + i, 0] = Fraction(1)
        out.append((f"two_{i}", A, Fraction(2)))
    for i in range(1, n + 1):
        A = exact.zeros((m, m))
        A[i, i] = A[i, n + i] = A[n + i, i] = A[n + i, n + i] = Fraction(1)
        out.append((f"three_{i}", A, Fraction(1)))
    for j in range(1, n + 1):
        A = exact.zeros((m, m))
        A[0, j] = A[j, 0] = Fraction(1)
        A[j, j] = Fraction(-2)
        out.append((f"four_{j}", A, Fraction(0)))
    return out


def build_primal(Q, n: int | None = None) -> BurerPrimal:
    Q = _sym(Q)
    n = Q.shape[0] if n is None else n
    if Q.shape != (n, n):
        raise ValueError("Q does not match n")
    m = 1 + 2 * n
    C = exact.zeros((m, m))
    C[1 : n + 1, 1 : n + 1] = Q
    return BurerPrimal(n, C, _constraint_matrices(n))


def vertex_lift(a):
    """``Y(a) = z z'`` with ``z = (1; a; 1-a)``, plus its rank-one certificate."""
    a = [int(v) for v in a]
    if any(v not in (0, 1) for v in a):
        raise ValueError("vertex_lift needs a 0/1 vector")
    z = exact.exact_array([1] + a + [1 - v for v in a])
    Y = np.outer(z, z)
    return Y, CpCertificate((z,))


# -- dual -------------------------------------------------------------------


@dataclass
class DualSolution:
    Q: np.ndarray
    alpha: Fraction
    beta: list
    gamma: list
    delta: list
    simplex_min: object = None
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.beta)

    @property
    def objective(self):
        return self.alpha + 2 * sum(self.beta) + sum(self.gamma)

    @property
    def variables(self):
        return [self.alpha, *self.beta, *self.gamma, *self.delta]

    @property
    def M(self):
        return dual_matrix(self.Q, self.alpha, self.beta, self.gamma, self.delta)

    def to_json(self):
        from .jsonio import encode_matrix, encode_scalar

        return {
            "alpha": encode_scalar(self.alpha),
            "beta": [encode_scalar(v) for v in self.beta],
            "gamma": [encode_scalar(v) for v in self.gamma],
            "delta": [encode_scalar(v) for v in self.delta],
            "objective": encode_scalar(self.objective),
            "M": encode_matrix(self.M),
            "simplex_min": encode_scalar(self.simplex_min) if self.simplex_min is not None else None,
            "method": self.method,
        }


def dual_matrix(Q, alpha, beta, gamma, delta):
    """``M = Q_block - alpha A_one - sum beta_i A_two_i - sum gamma_i A_three_i - sum delta_i A_four_i``."""
    Q = np.asarray(Q)
    n = len(beta)
    m = 1 + 2 * n
    exact_mode = all(isinstance(v, (Fraction, int)) for v in [alpha, *beta, *gamma, *delta]) and exact.is_exact(Q)
    M = exact.zeros((m, m)) if exact_mode else np.zeros((m, m))
    M[0, 0] = -alpha
    for i in range(n):
        for j in range(n):
            M[1 + i, 1 + j] = Q[i, j]
    for i in range(n):
        p, c = 1 + i, 1 + n + i
        M[0, p] = M[p, 0] = -beta[i] - delta[i]
        M[0, c] = M[c, 0] = -beta[i]
        M[p, p] = Q[i, i] - gamma[i] + 2 * delta[i]
        M[c, c] = -gamma[i]
        M[p, c] = M[c, p] = -gamma[i]
    return M


def _unpack(v, n):
    return v[0], list(v[1 : 1 + n]), list(v[1 + n : 1 + 2 * n]), list(v[1 + 2 * n : 1 + 3 * n])


def _objective_vector(n):
    return [Fraction(1)] + [Fraction(2)] * n + [Fraction(1)] * n + [Fraction(0)] * n


def _cut(z, Q, n):
    """``z'M(v)z = c0 + coeffs . v`` for a fixed ``z``."""
    xi = z[0]
    x = z[1 : 1 + n]
    s = z[1 + n :]
    c0 = sum(Q[i, j] * x[i] * x[j] for i in range(n) for j in range(n))
    coeffs = [-xi * xi]
    coeffs += [-2 * xi * (x[i] + s[i]) for i in range(n)]
    coeffs += [-((x[i] + s[i]) ** 2) for i in range(n)]
    coeffs += [-2 * xi * x[i] + 2 * x[i] * x[i] for i in range(n)]
    return Fraction(c0), coeffs


def interior_dual_point(Q) -> DualSolution:
    """``beta = delta = 0``, ``gamma_i = alpha`` with ``alpha = min(0, 2 lambda_min(Q)) - 1``.

    ``lambda_min`` is computed in floating point and rounded down to a
    rational so that the exact point stays strictly copositive.
    """
    Q = _sym(Q)
    n = Q.shape[0]
    lmin = float(np.linalg.eigvalsh(exact.to_float(Q))[0])
    lo = Fraction(lmin).limit_denominator(1000)
    if lo > lmin:
        lo -= Fraction(1, 1000)
    alpha = min(Fraction(0), 2 * lo) - 1
    zero = [Fraction(0)] * n
    return DualSolution(Q, alpha, list(zero), [alpha] * n, list(zero), method="interior")


@dataclass(frozen=True)
class DualBox:
    """Closed intervals for ``alpha, beta_1..n, gamma_1..n, delta_1..n`` in that order."""

    bounds: tuple

    def contains(self, sol: DualSolution) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(sol.variables, self.bounds))

    def distance(self, sol: DualSolution):
        return max(max(lo - v, v - hi, 0) for v, (lo, hi) in zip(sol.variables, self.bounds))


def dual_box(Q, B) -> DualBox:
    """Bounds on any dual point with objective at least ``B`` (requires ``B < kappa``)."""
    Q = _sym(Q)
    n = Q.shape[0]
    B = exact.frac(B)
    k, _ = kappa(Q)
    if B >= k:
        raise ValueError("the box needs B < kappa")
    bounds = [(2 * B, Fraction(0))]
    bounds += [((2 * n - 1) * B / 2, -(2 * n + 3) * B / 2)] * n
    bounds += [((4 * n + 2) * B, Fraction(0))] * n
    bounds += [(((4 * n + 2) * B - Q[i, i]) / 2, (Q[i, i] - (8 * n + 2) * B) / 2) for i in range(n)]
    return DualBox(tuple(bounds))


class _BoxLP:
    """``max c.v`` over a box and accumulated cuts, solved through its LP dual.

    With ``v = lo + w``, ``0 <= w <= width`` and cuts ``g.w <= h`` the dual is
    ``min width.t + h.y`` s.t. ``t - s + sum y_j g_j = c`` over nonnegative
    ``t, s, y``.  A new cut is a new dual column, so the simplex warm-starts
    from the previous basis; ``w`` is read off as the simplex multipliers.
    """

    def __init__(self, box: DualBox, c):
        self.lo = [lo for lo, _ in box.bounds]
        self.c = c
        k = len(c)
        A = [[Fraction(0)] * (2 * k) for _ in range(k)]
        costs = []
        for j, (lo, hi) in enumerate(box.bounds):
            A[j][j] = Fraction(1)
            A[j][k + j] = Fraction(-1)
        costs = [hi - lo for lo, hi in box.bounds] + [Fraction(0)] * k
        self.lp = StandardSimplex(A, c, costs)
        self.cuts = 0

    def add_cut(self, c0, coeffs):
        # c0 + coeffs.v >= 0  <=>  (-coeffs).w <= c0 + coeffs.lo
        g = [-a for a in coeffs]
        h = c0 + sum(a * lo for a, lo in zip(coeffs, self.lo))
        self.lp.add_column(g, h)
        self.cuts += 1

    def solve(self):
        self.lp.solve()
        w = self.lp.duals()
        v = [lo + wi for lo, wi in zip(self.lo, w)]
        return v, self.lp.value() + sum(c * lo for c, lo in zip(self.c, self.lo))


def _initial_cut_vectors(n):
    m = 1 + 2 * n
    out = []
    for a in binary_vectors(n):
        out.append([Fraction(1)] + [Fraction(v) for v in a] + [Fraction(1 - v) for v in a])
    for r in (1, 2):
        for S in combinations(range(m), r):
            z = [Fraction(0)] * m
            for i in S:
                z[i] = Fraction(1)
            out.append(z)
    return out


def _rational_cut(zf, check):
    """Rationalize a float separating vector; prefer small denominators that still cut."""
    zf = np.clip(np.asarray(zf, dtype=float), 0, None)
    for den in (100, 10_000, 1_000_000, None):
        z = [Fraction(float(v)) if den is None else Fraction(float(v)).limit_denominator(den) for v in zf]
        if check(z):
            return z
    return None


def _box_phase(Q, n, kap, tol, cop_tol, budget, diag):
    box = dual_box(Q, kap - 1)
    c = _objective_vector(n)
    lp = _BoxLP(box, c)
    for z in _initial_cut_vectors(n):
        lp.add_cut(*_cut(z, Q, n))
    diag["box_bound"] = None
    while True:
        v, ub = lp.solve()
        diag["box_bound"] = ub
        diag["cuts"] = lp.cuts
        if ub < kap - Fraction(tol):
            return "gap", None
        alpha, beta, gamma, delta = _unpack(v, n)
        M = dual_matrix(Q, alpha, beta, gamma, delta)
        res = simplex_min_quadratic(exact.to_float(M))
        if res.value >= -cop_tol:
            ex = simplex_min_quadratic(M)
            if ex.value >= -cop_tol and kap - ub <= tol:
                sol = DualSolution(Q, alpha, beta, gamma, delta, ex.value, "cutting_plane")
                return "optimal", sol
        if lp.cuts >= budget:
            return "budget", None

        def violated(z):
            c0, co = _cut(z, Q, n)
            return c0 + sum(a * b for a, b in zip(co, v)) < 0

        z = _rational_cut(res.argmin, violated)
        if z is None:
            # float minimizer does not separate; fall back to the exact one
            z = list(simplex_min_quadratic(M).argmin)
            if not violated(z):
                return "stalled", None
        lp.add_cut(*_cut(z, Q, n))


def penalty_dual(Q, kap, eps, g) -> DualSolution:
    """``delta_i = -Q_ii/2``, ``beta_i = g``, ``gamma_i = -g``, ``alpha = kappa - eps - n g``.

    The objective is exactly ``kappa - eps`` and
    ``z'Mz = eps xi^2 + g sum (x_i + s_i - xi)^2 + p(xi, x)`` where ``p`` is
    the homogenized multilinear form of ``a'Qa - kappa``; copositive for
    large enough ``g``.
    """
    Q = _sym(Q)
    n = Q.shape[0]
    g = exact.frac(g)
    alpha = kap - eps - n * g
    return DualSolution(Q, alpha, [g] * n, [-g] * n, [-Q[i, i] / 2 for i in range(n)], method="penalty")


def _penalty_phase(Q, n, kap, tol, diag, max_doublings=64):
    eps = Fraction(repr(float(tol))) / 2
    g = Fraction(1)
    for _ in range(max_doublings):
        sol = penalty_dual(Q, kap, eps, g)
        if simplex_min_quadratic(exact.to_float(sol.M)).value >= 0:
            ex = simplex_min_quadratic(sol.M)
            if ex.value >= 0:
                sol.simplex_min = ex.value
                diag["penalty_g"] = g
                diag["penalty_eps"] = eps
                return sol
        g *= 2
    raise DualSolveError("penalty weight did not certify copositivity", diag)


def solve_dual(Q, n: int | None = None, tol: float = DEFAULT_TOL, cop_tol: float = DEFAULT_COP_TOL,
               max_cuts: int = MAX_CUTS, box_budget: int = 600) -> DualSolution:
    """Near-optimal copositive dual point: objective within ``tol`` of ``kappa``.

    First a cutting-plane loop (exact LP, simplex-minimum separation) inside
    the a-priori box with ``B = kappa - 1``.  If the LP bound shows that the
    box contains no ``tol``-optimal point, or the box budget runs out, the
    exact penalty family is used instead, whose objective is ``kappa - tol/2``
    and whose matrix is certified copositive by the exact simplex minimum.
    """
    Q = _sym(Q)
    n = Q.shape[0] if n is None else n
    if n > 4:
        raise ValueError("solve_dual supports n <= 4")
    kap, _ = kappa(Q)
    diag = {"kappa": kap}
    status, sol = _box_phase(Q, n, kap, tol, cop_tol, min(box_budget, max_cuts), diag)
    diag["box_status"] = status
    if status != "optimal":
        sol = _penalty_phase(Q, n, kap, tol, diag)
    if diag.get("cuts", 0) > max_cuts:
        raise DualSolveError("cut limit exceeded", diag)
    sol.diagnostics = diag
    return sol


# -- factorization ----------------------------------------------------------


@dataclass
class CpFactorizationCert:
    n: int
    slack: np.ndarray
    vertices: list  # the a in {0,1}^n, in slack-row order
    lifts: list  # (Y, CpCertificate)
    facets: list  # FacetInequality
    duals: list  # DualSolution
    max_abs_err: float
    membership_ok: bool

    @property
    def T(self):
        return [Y for Y, _ in self.lifts]

    @property
    def U(self):
        return [d.M for d in self.duals]

    def verify(self, tol: float = 1e-5):
        K = ConeOracle.completely_positive(1 + 2 * self.n)
        return verify_cone_factorization(
            self.slack, self.T, self.U, K, tol=DEFAULT_COP_TOL, certificates=[c for _, c in self.lifts]
        )

    def to_json(self):
        from .jsonio import encode_matrix, encode_scalar

        return {
            "n": self.n,
            "cone": ConeOracle.completely_positive(1 + 2 * self.n).to_json(),
            "slack": encode_matrix(self.slack),
            "vertices": [list(a) for a in self.vertices],
            "Y_factors": [[encode_scalar(v) for v in c.factors[0]] for _, c in self.lifts],
            "facets": [
                {"Q": encode_matrix(f.Q), "kappa": encode_scalar(f.kappa), "dual": d.to_json()}
                for f, d in zip(self.facets, self.duals)
            ],
            "simplex_min": [encode_scalar(d.simplex_min) for d in self.duals],
            "max_abs_err": self.max_abs_err,
            "membership_ok": self.membership_ok,
        }


def _solve_one(args):
    Q, tol, cop_tol = args
    return solve_dual(Q, tol=tol, cop_tol=cop_tol)


def _workers(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CONEKIT_THREADS")
    return max(1, int(env)) if env else 1


def factorize_cor_slack(n: int, tol: float = DEFAULT_TOL, cop_tol: float = DEFAULT_COP_TOL,
                        threads: int | None = None) -> CpFactorizationCert:
    """Factorize the slack matrix of COR(n) over the completely positive cone of side ``1 + 2n``.

    Rows: vertex lifts ``Y(a)``.  Columns: copositive dual matrices, one per
    facet.  Facet solves run in a process pool when ``threads`` (or the
    ``CONEKIT_THREADS`` environment variable) exceeds one.
    """
    if not 1 <= n <= 3:
        raise ValueError("factorize_cor_slack supports 1 <= n <= 3")
    P = correlation_polytope(n)
    H = facet_enum(P)
    S = slack_matrix(P, H)
    facets = [FacetInequality.from_row(row, b, n) for row, b in zip(H.A, H.b)]
    jobs = [(f.Q, tol, cop_tol) for f in facets]
    workers = _workers(threads)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            duals = list(pool.map(_solve_one, jobs))
    else:
        duals = [_solve_one(j) for j in jobs]
    vertices = list(binary_vectors(n))
    lifts = [vertex_lift(a) for a in vertices]
    cert = CpFactorizationCert(n, S, vertices, lifts, facets, duals, 0.0, False)
    report = cert.verify()
    cert.max_abs_err = report.max_abs_err
    cert.membership_ok = report.membership_ok
    return cert


# -- the lift as an affine slice of the completely positive cone ------------


@dataclass
class CpLift:
    n: int
    constraints: list
    projection: dict  # (i, j) of COR(n) -> (row, col) of Y
    proper: bool = False

    @property
    def m(self):
        return 1 + 2 * self.n

    @property
    def cone(self):
        return ConeOracle.completely_positive(self.m)

    def project(self, Y):
        return tuple(Y[r, c] for r, c in self.projection.values())

    def satisfied_by(self, Y) -> bool:
        return satisfies_all(sparse_constraints(self.constraints), Y)

    def to_json(self):
        from .jsonio import encode_matrix, encode_scalar

        return {
            "n": self.n,
            "cone": self.cone.to_json(),
            "constraints": [
                {"name": name, "A": encode_matrix(A), "rhs": encode_scalar(rhs)} for name, A, rhs in self.constraints
            ],
            "projection": [{"z": [i + 1, j + 1], "Y": [r, c]} for (i, j), (r, c) in self.projection.items()],
            "proper": self.proper,
        }


def sparse_constraints(constraints):
    """``(nonzero entries, rhs)`` pairs for fast exact evaluation of ``A . Y``."""
    out = []
    for _, A, rhs in constraints:
        A = np.asarray(A)
        out.append(([(i, j, A[i, j]) for i, j in zip(*np.nonzero(A != 0))], rhs))
    return out


def satisfies_all(sparse, Y) -> bool:
    Y = np.asarray(Y)
    return all(sum(c * Y[i, j] for i, j, c in entries) == rhs for entries, rhs in sparse)


def cp_extension_constraints(n: int) -> CpLift:
    """Affine constraints and projection ``z_ij = Y_{i,j}`` (1-based block indices) of the CP lift of COR(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    proj = {(i, j): (i + 1, j + 1) for i, j in cor_coordinates(n)}
    return CpLift(n, _constraint_matrices(n), proj, proper=False)
