"""Oracles for the four cone families.

Elements of the orthant are 1-d arrays of length ``ambient``; elements of the
matrix cones are ``ambient x ambient`` symmetric (or Hermitian, for the complex
psd cone) arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import exact
from .lp import LPInfeasible, StandardSimplex
from .stqp import simplex_min_quadratic

KINDS = ("orthant", "psd", "copositive", "completely_positive")
_DUALS = {
    "orthant": "orthant",
    "psd": "psd",
    "copositive": "completely_positive",
    "completely_positive": "copositive",
}
INTERIOR_TOL = 1e-12


def sym_eig(M):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    M = exact.to_float(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    scale = 1.0 + np.abs(M).max(initial=0.0)
    if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return w, V


@dataclass(frozen=True)
class ConeOracle:
    kind: str
    ambient: int
    field: str = "real"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.ambient < 1:
            raise ValueError("ambient dimension must be positive")
        if self.field not in ("real", "complex"):
            raise ValueError("field must be 'real' or 'complex'")
        if self.field == "complex" and self.kind != "psd":
            raise ValueError("complex field only supported for the psd cone")

    @classmethod
    def orthant(cls, n):
        return cls("orthant", n)

    @classmethod
    def psd(cls, d, complex_=False):
        return cls("psd", d, "complex" if complex_ else "real")

    @classmethod
    def copositive(cls, d):
        return cls("copositive", d)

    @classmethod
    def completely_positive(cls, d):
        return cls("completely_positive", d)

    def dual(self) -> "ConeOracle":
        return ConeOracle(_DUALS[self.kind], self.ambient, self.field)

    @property
    def is_matrix(self) -> bool:
        return self.kind != "orthant"

    @property
    def gpt_dim(self) -> int:
        """Real dimension of the ambient space (the ``n`` of a GPT)."""
        d = self.ambient
        if self.kind == "orthant":
            return d
        if self.field == "complex":
            return d * d
        return d * (d + 1) // 2

    @property
    def shape(self):
        return (self.ambient,) if self.kind == "orthant" else (self.ambient, self.ambient)

    def check_shape(self, x):
        x = np.asarray(x)
        if x.shape != self.shape:
            raise ValueError(f"element of shape {x.shape} does not match cone shape {self.shape}")
        return x

    def inner(self, x, y):
        """Scalar product; trace(XY) for (Hermitian) matrices."""
        x = np.asarray(x)
        y = np.asarray(y)
        if np.iscomplexobj(x) or np.iscomplexobj(y):
            return float(np.real(np.vdot(x, y)))
        return (x * y).sum()

    def coords(self, x):
        """Real coordinates of ``x`` in a basis of the ambient space (length ``gpt_dim``)."""
        x = self.check_shape(x)
        if self.kind == "orthant":
            return list(x)
        d = self.ambient
        out = [x[i, j] for i in range(d) for j in range(i, d)]
        if self.field == "complex":
            out = [np.real(v) for v in out] + [np.imag(x[i, j]) for i in range(d) for j in range(i + 1, d)]
        return out

    def identity(self):
        if self.kind == "orthant":
            return exact.exact_array([1] * self.ambient)
        return exact.identity(self.ambient)

    def contains(self, x, tol: float = 1e-9, certificate=None) -> "Membership":
        return contains(self, x, tol, certificate)

    def is_interior(self, x) -> bool:
        return is_interior(self, x)

    def to_json(self):
        out = {"kind": self.kind, "ambient": self.ambient}
        if self.field != "real":
            out["field"] = self.field
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], int(obj["ambient"]), obj.get("field", "real"))


@dataclass(frozen=True)
class CpCertificate:
    """Represents ``sum_k w_k z_k z_k'`` with entrywise nonnegative ``z_k``."""

    factors: tuple
    weights: tuple | None = None

    def __post_init__(self):
        for z in self.factors:
            if any(v < 0 for v in np.asarray(z).flat):
                raise ValueError("completely positive factors must be entrywise nonnegative")
        if self.weights is not None:
            if len(self.weights) != len(self.factors):
                raise ValueError("one weight per factor required")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be nonnegative")

    def matrix(self):
        ws = self.weights if self.weights is not None else [1] * len(self.factors)
        zs = [np.asarray(z) for z in self.factors]
        out = None
        for w, z in zip(ws, zs):
            term = w * np.outer(z, z)
            out = term if out is None else out + term
        return out

    def scaled(self, c) -> "CpCertificate":
        ws = self.weights if self.weights is not None else [1] * len(self.factors)
        return CpCertificate(self.factors, tuple(c * w for w in ws))

    def to_json(self):
        from ..jsonio import encode_scalar

        out = {"factors": [[encode_scalar(v) for v in z] for z in self.factors]}
        if self.weights is not None:
            out["weights"] = [encode_scalar(w) for w in self.weights]
        return out

    @classmethod
    def from_json(cls, obj):
        from ..jsonio import decode_scalar

        factors = tuple(np.array([decode_scalar(v) for v in z], dtype=object) for z in obj["factors"])
        weights = obj.get("weights")
        if weights is not None:
            weights = tuple(decode_scalar(w) for w in weights)
        return cls(factors, weights)


class Verdict(enum.Enum):
    MEMBER = "member"
    NOT_MEMBER = "not_member"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Membership:
    verdict: Verdict
    certificate: object = None
    witness: object = None
    value: object = None
    detail: str = ""

    @property
    def is_member(self) -> bool:
        return self.verdict is Verdict.MEMBER


def _unit(d, i):
    e = np.zeros(d)
    e[i] = 1.0
    return e


def contains(K: ConeOracle, x, tol: float = 1e-9, certificate=None) -> Membership:
    """Test ``x in K``.

    Orthant: sign test (exact on rational input).  psd: smallest eigenvalue.
    copositive: minimum of the quadratic form on the simplex, the minimizer is
    the witness when negative.  completely_positive: needs a
    :class:`CpCertificate`; without one only the doubly-nonnegative necessary
    conditions can refute membership, otherwise the answer is ``UNKNOWN``.
    """
    x = K.check_shape(x)
    ex = exact.is_exact(x)
    if K.kind == "orthant":
        neg = [i for i, v in enumerate(x) if (v < 0 if ex else v < -tol)]
        if neg:
            i = neg[0]
            return Membership(Verdict.NOT_MEMBER, witness=_unit(K.ambient, i), value=x[i])
        return Membership(Verdict.MEMBER, value=min(x))
    if K.kind == "psd":
        w, V = sym_eig(x)
        if w[0] < -tol:
            v = V[:, 0]
            return Membership(Verdict.NOT_MEMBER, witness=np.outer(v, v.conj()), value=w[0])
        return Membership(Verdict.MEMBER, value=w[0])
    _check_symmetric(x, ex, tol)
    if K.kind == "copositive":
        res = simplex_min_quadratic(x)
        if res.value < -tol:
            z = res.argmin
            return Membership(Verdict.NOT_MEMBER, witness=np.outer(z, z), value=res.value)
        return Membership(Verdict.MEMBER, certificate=res, value=res.value)
    # completely positive
    xf = exact.to_float(x)
    i, j = np.unravel_index(np.argmin(xf), xf.shape)
    if xf[i, j] < -tol:
        W = np.zeros(xf.shape)
        W[i, j] = W[j, i] = 1.0
        return Membership(Verdict.NOT_MEMBER, witness=W, value=xf[i, j], detail="negative entry")
    w, V = sym_eig(xf)
    if w[0] < -tol:
        v = V[:, 0]
        return Membership(Verdict.NOT_MEMBER, witness=np.outer(v, v), value=w[0], detail="not positive semidefinite")
    if certificate is None:
        return Membership(Verdict.UNKNOWN, detail="no completely positive certificate attached")
    if not isinstance(certificate, CpCertificate):
        certificate = CpCertificate(tuple(certificate))
    rec = certificate.matrix()
    err = np.abs(exact.to_float(rec) - xf).max()
    if exact.is_exact(rec) and ex:
        err = max(abs(a - b) for a, b in zip(np.asarray(rec).flat, x.flat))
    if err <= tol:
        return Membership(Verdict.MEMBER, certificate=certificate, value=err)
    return Membership(Verdict.UNKNOWN, certificate=certificate, value=err, detail="certificate does not reproduce the matrix")


def _check_symmetric(x, ex, tol):
    if ex:
        if any(x[i, j] != x[j, i] for i in range(len(x)) for j in range(i)):
            raise ValueError("matrix is not symmetric")
    elif np.abs(x - x.T).max() > max(tol, 1e-12):
        raise ValueError("matrix is not symmetric")


def is_interior(K: ConeOracle, x) -> bool:
    """Strict interiority at :data:`INTERIOR_TOL`."""
    x = K.check_shape(x)
    if K.kind == "orthant":
        return all(v > INTERIOR_TOL for v in x)
    if K.kind == "psd":
        return sym_eig(x)[0][0] > INTERIOR_TOL
    if K.kind == "copositive":
        return simplex_min_quadratic(x).value > INTERIOR_TOL
    raise ValueError("interiority test not available for the completely positive cone")


def caratheodory_unit(effects, u, K: ConeOracle | None = None):
    """Nonnegative ``lam`` with ``sum lam_i e_i = u`` and at most ``n`` nonzeros.

    The system is solved exactly as an LP in the real coordinates of ``K``.
    Float effects are converted exactly and ``u`` is then replaced by the exact
    sum of the effects, so the all-ones vector stays feasible.
    """
    effects = [np.asarray(e) for e in effects]
    if K is None:
        K = _guess_cone(effects[0])
    cols = [[exact.frac(v) for v in K.coords(e)] for e in effects]
    if all(exact.is_exact(e) for e in effects) and exact.is_exact(u):
        target = [exact.frac(v) for v in K.coords(np.asarray(u))]
    else:
        target = [sum((c[k] for c in cols), Fraction(0)) for k in range(len(cols[0]))]
    nrows = len(target)
    A = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    simplex = StandardSimplex(A, target, [0] * len(cols))
    try:
        simplex.solve()
    except LPInfeasible as err:  # pragma: no cover - excluded by the precondition
        raise AssertionError("effects do not sum to the unit") from err
    return simplex.point()


def _guess_cone(e):
    e = np.asarray(e)
    if e.ndim == 1:
        return ConeOracle.orthant(len(e))
    return ConeOracle("psd", len(e), "complex" if np.iscomplexobj(e) else "real")


def extremal_refine(e, K: ConeOracle, tol: float = 1e-12):
    """Split ``e`` into extremal vectors of ``K`` that sum to ``e``."""
    e = K.check_shape(e)
    if K.kind == "orthant":
        zero = Fraction(0) if e.dtype == object else 0.0
        parts = []
        for i, v in enumerate(e):
            if v != 0:
                p = np.full(K.ambient, zero, dtype=e.dtype)
                p[i] = v
                parts.append(p)
        return parts
    if K.kind == "psd":
        w, V = sym_eig(e)
        scale = max(1.0, abs(w).max(initial=0.0))
        parts = []
        for lam, v in zip(w[::-1], V.T[::-1]):
            if lam > tol * scale:
                parts.append(lam * np.outer(v, v.conj()))
        return parts
    raise ValueError("extremal rays not characterized for the %s cone" % K.kind)


def min_scale_dominating(v, u, K: ConeOracle, rtol: float = 1e-9, tol: float = 1e-9):
    """Smallest ``mu > 0`` with ``mu u - v`` in ``K``.

    The orthant uses the exact closed form ``max v_i / u_i``; psd and
    copositive use bisection to relative tolerance ``rtol`` and return the
    upper (feasible) end.
    """
    v = K.check_shape(v)
    u = K.check_shape(u)
    if not is_interior(K, u):
        raise ValueError("u is not in the interior of the cone")
    if K.kind == "orthant":
        ratios = [vi / ui for vi, ui in zip(v, u)] if exact.is_exact(v) and exact.is_exact(u) else list(exact.to_float(v) / exact.to_float(u))
        mu = max(ratios)
        return mu if mu > 0 else (Fraction(0) if exact.is_exact(v) else 0.0)
    uf = exact.to_float(u)
    vf = exact.to_float(v)

    def ok(mu):
        return contains(K, mu * uf - vf, tol=0.0).is_member

    if ok(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, hi * 2
    while hi - lo > rtol * hi:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
