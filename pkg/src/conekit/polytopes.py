"""0/1 polytopes, exact facet enumeration and slack matrices.

Slack matrices have rows indexed by vertices and columns by facets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import exact
from .cones import ConeOracle, Verdict, contains


def binary_vectors(n: int):
    """All of {0,1}^n, ordered with the first coordinate as least significant bit."""
    for bits in product((0, 1), repeat=n):
        yield tuple(reversed(bits))


def cor_coordinates(n: int):
    """Coordinate labels ``(i, j)``, ``i <= j``: diagonal first, then the upper triangle row by row."""
    return [(i, i) for i in range(n)] + [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class ZeroOnePolytope:
    dim: int
    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(int(v) for v in vert) for vert in self.vertices)
        if not verts:
            raise ValueError("a 0/1 polytope needs at least one vertex")
        for v in verts:
            if len(v) != self.dim:
                raise ValueError("vertex length does not match dimension")
            if any(c not in (0, 1) for c in v):
                raise ValueError("vertices must be 0/1 vectors")
        if len(set(verts)) != len(verts):
            raise ValueError("vertices must be pairwise distinct")
        object.__setattr__(self, "vertices", verts)

    def to_json(self):
        return {"dim": self.dim, "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["dim"]), tuple(tuple(v) for v in obj["vertices"]))


def correlation_polytope(n: int) -> ZeroOnePolytope:
    """COR(n) in the coordinates of :func:`cor_coordinates`."""
    if not 1 <= n <= 5:
        raise ValueError("correlation_polytope supports 1 <= n <= 5")
    coords = cor_coordinates(n)
    verts = tuple(tuple(a[i] * a[j] for i, j in coords) for a in binary_vectors(n))
    return ZeroOnePolytope(len(coords), verts)


@dataclass
class HRep:
    """``{x : A x >= b, E x = f}`` with exact rational data."""

    A: list
    b: list
    eq_A: list = field(default_factory=list)
    eq_b: list = field(default_factory=list)

    @property
    def num_facets(self) -> int:
        return len(self.A)

    def satisfies(self, x) -> bool:
        x = [exact.frac(v) for v in x]
        ineq = all(sum(a * v for a, v in zip(row, x)) >= bi for row, bi in zip(self.A, self.b))
        eq = all(sum(a * v for a, v in zip(row, x)) == fi for row, fi in zip(self.eq_A, self.eq_b))
        return ineq and eq

    def to_json(self, exact_: bool = True):
        from .jsonio import encode_matrix

        d = len(self.A[0]) if self.A else (len(self.eq_A[0]) if self.eq_A else 0)
        return {
            "A": encode_matrix(np.array(self.A, dtype=object).reshape(len(self.A), d), exact_),
            "b": encode_matrix(np.array(self.b, dtype=object), exact_),
            "equalities": {
                "A": encode_matrix(np.array(self.eq_A, dtype=object).reshape(len(self.eq_A), d), exact_),
                "b": encode_matrix(np.array(self.eq_b, dtype=object), exact_),
            },
        }


def _normalize_row(a, b):
    lead = next(v for v in a if v != 0)
    s = abs(lead)
    return [v / s for v in a], b / s


def _adjacent(zp, zn, others, k):
    common = zp & zn
    if len(common) < k - 2:
        return False
    return not any(common <= z for z in others)


def _extreme_rays(rows, k):
    """Extreme rays of the pointed cone ``{h : rows . h >= 0}`` in R^k (double description)."""
    rows = sorted(rows)
    basis_idx = []
    chosen = []
    for i, r in enumerate(rows):
        if exact.rank(chosen + [r]) > len(chosen):
            chosen.append(r)
            basis_idx.append(i)
        if len(chosen) == k:
            break
    if len(chosen) < k:
        raise ValueError("cone is not pointed")
    # rays of {h : B h >= 0} are the columns of B^-1
    rays = []
    for col in range(k):
        e = [Fraction(int(i == col)) for i in range(k)]
        rays.append(exact.integer_normalize(exact.solve(chosen, e)))
    processed = list(basis_idx)

    def zero_set(h):
        return frozenset(i for i in processed if sum(a * b for a, b in zip(rows[i], h)) == 0)

    zsets = [zero_set(h) for h in rays]
    for i, a in enumerate(rows):
        if i in basis_idx:
            continue
        vals = [sum(x * y for x, y in zip(a, h)) for h in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        zer = [j for j, v in enumerate(vals) if v == 0]
        new_rays = [rays[j] for j in pos + zer]
        new_z = [zsets[j] | ({i} if j in zer else frozenset()) for j in pos + zer]
        for p in pos:
            for n in neg:
                others = [zsets[j] for j in range(len(rays)) if j not in (p, n)]
                if not _adjacent(zsets[p], zsets[n], others, k):
                    continue
                h = [vals[p] * x - vals[n] * y for x, y in zip(rays[n], rays[p])]
                h = exact.integer_normalize(h)
                new_rays.append(h)
                new_z.append((zsets[p] & zsets[n]) | {i})
        rays, zsets = new_rays, new_z
        processed.append(i)
    return rays


def facet_enum(P: ZeroOnePolytope) -> HRep:
    """Exact irredundant H-representation of a 0/1 polytope.

    Lower-dimensional polytopes get their affine hull as equalities in reduced
    row echelon form; inequalities then only use the free coordinates.
    """
    if P.dim > 8 or len(P.vertices) > 64:
        raise ValueError("facet enumeration limited to d <= 8 and at most 64 vertices")
    d = P.dim
    W = [[Fraction(1)] + [Fraction(c) for c in v] for v in P.vertices]
    # (h0, e) with h0 + e.v = 0 for all vertices  <=>  e.x = -h0 on aff(P)
    null = exact.nullspace(W, d + 1)
    eq_rows = [[h[j] for j in range(1, d + 1)] + [-h[0]] for h in null]
    R, pivots = exact.rref(eq_rows) if eq_rows else ([], [])
    eq_A = [row[:d] for row in R]
    eq_b = [row[d] for row in R]
    free = [j for j in range(d) if j not in pivots]
    k = len(free)
    if k == 0:
        return HRep([], [], eq_A, eq_b)
    cone_rows = [[Fraction(1)] + [Fraction(v[j]) for j in free] for v in P.vertices]
    rays = _extreme_rays(cone_rows, k + 1)
    A, b = [], []
    for h in rays:
        row = [Fraction(0)] * d
        for j, c in zip(free, h[1:]):
            row[j] = c
        a, bb = _normalize_row(row, -h[0])
        A.append(a)
        b.append(bb)
    order = sorted(range(len(A)), key=lambda t: (A[t], b[t]))
    return HRep([A[t] for t in order], [b[t] for t in order], eq_A, eq_b)


def slack_matrix(P: ZeroOnePolytope, H: HRep) -> np.ndarray:
    """``S[i, j] = A_j v_i - b_j`` as an exact object array."""
    S = exact.zeros((len(P.vertices), len(H.A)))
    for i, v in enumerate(P.vertices):
        for j, (row, bj) in enumerate(zip(H.A, H.b)):
            s = sum(a * c for a, c in zip(row, v)) - bj
            if s < 0:
                raise ValueError(f"vertex {i} violates inequality {j}: inconsistent H-representation")
            S[i, j] = s
    return S


@dataclass
class FactorizationReport:
    max_abs_err: float
    membership_ok: bool
    unknown: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.membership_ok

    def passed(self, tol) -> bool:
        return self.membership_ok and self.max_abs_err <= tol


def verify_cone_factorization(S, T, U, K: ConeOracle, tol: float = 1e-9, certificates=None) -> FactorizationReport:
    """Check ``<T_v, U_f> = S[v, f]`` and cone membership of every factor.

    ``T`` lives in ``K`` and ``U`` in ``K.dual()``.  Completely positive
    elements are certified through ``certificates`` (one per element of ``T``
    when ``K`` is completely positive).  ``UNKNOWN`` membership is reported but
    does not fail the check.
    """
    S = np.asarray(S)
    if S.shape != (len(T), len(U)):
        raise ValueError("factor counts do not match the matrix shape")
    err = 0
    for i, t in enumerate(T):
        for j, u in enumerate(U):
            diff = abs(K.inner(t, u) - S[i, j])
            err = max(err, diff)
    unknown, failures = [], []
    Kd = K.dual()
    for side, cone, elems in (("T", K, T), ("U", Kd, U)):
        for i, x in enumerate(elems):
            cert = None
            if cone.kind == "completely_positive" and certificates is not None and side == "T":
                cert = certificates[i]
            res = contains(cone, x, tol, certificate=cert)
            if res.verdict is Verdict.NOT_MEMBER:
                failures.append((side, i, res.detail or "not in cone"))
            elif res.verdict is Verdict.UNKNOWN:
                unknown.append((side, i))
    return FactorizationReport(float(err), not failures, unknown, failures)


def trivial_factorization(S):
    """``S = S . I``: rows of ``S`` and unit vectors, both in the orthant."""
    S = np.asarray(S)
    nf = S.shape[1]
    T = [S[i].copy() for i in range(S.shape[0])]
    U = []
    for j in range(nf):
        e = exact.zeros(nf) if S.dtype == object else np.zeros(nf)
        e[j] = 1
        if S.dtype == object:
            e[j] = Fraction(1)
        U.append(e)
    return T, U, ConeOracle.orthant(nf)
