"""One-way protocols computing a nonnegative matrix in expectation.

A cone factorization ``C[x, y] = <w(x), r(y)>`` with ``w(x)`` in ``C`` and
``r(y)`` in ``C*`` turns into a protocol where Alice sends a normalized state
plus an abort bit and Bob measures a two-outcome measurement and outputs a
nonnegative number.  The converse direction reads a factorization off any
protocol with nonnegative outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .cones import ConeOracle, CpCertificate, Verdict, contains, min_scale_dominating
from .gpt import GptSystem, Measurement, outcome_distribution


def _is_zero(x) -> bool:
    return all(v == 0 for v in np.asarray(x).flat)


@dataclass
class ConeFactorization:
    """States ``w(x)`` in ``cone`` and responses ``r(y)`` in its dual."""

    cone: ConeOracle
    states: list
    responses: list
    certificates: list | None = None  # CpCertificate per state for the CP cone

    def __post_init__(self):
        self.states = [self.cone.check_shape(s) for s in self.states]
        self.responses = [self.cone.check_shape(r) for r in self.responses]
        if not self.states or not self.responses:
            raise ValueError("empty factorization")
        if self.certificates is not None and len(self.certificates) != len(self.states):
            raise ValueError("one certificate per state required")

    def matrix(self):
        rows = [[self.cone.inner(s, r) for r in self.responses] for s in self.states]
        if all(exact.is_exact(s) for s in self.states) and all(exact.is_exact(r) for r in self.responses):
            return exact.exact_array(rows)
        return np.array(rows, dtype=float)

    def validate(self, tol: float = 1e-9):
        """Raise if a factor is certifiably outside its cone or the matrix has a negative entry."""
        dual = self.cone.dual()
        for i, s in enumerate(self.states):
            cert = self.certificates[i] if self.certificates is not None else None
            if contains(self.cone, s, tol, certificate=cert).verdict is Verdict.NOT_MEMBER:
                raise ValueError(f"state {i} is not in the cone")
        for j, r in enumerate(self.responses):
            if contains(dual, r, tol).verdict is Verdict.NOT_MEMBER:
                raise ValueError(f"response {j} is not in the dual cone")
        C = self.matrix()
        if any(v < -tol for v in np.asarray(C).flat):
            raise ValueError("represented matrix has a negative entry")

    def to_json(self, exact_: bool = True):
        from .jsonio import encode_element

        out = {
            "cone": self.cone.to_json(),
            "states": [encode_element(s, exact_) for s in self.states],
            "responses": [encode_element(r, exact_) for r in self.responses],
        }
        if self.certificates is not None:
            out["cp_certificates"] = [c.to_json() for c in self.certificates]
        return out

    @classmethod
    def from_json(cls, obj):
        from .jsonio import decode_element

        cone = ConeOracle.from_json(obj["cone"])
        certs = obj.get("cp_certificates")
        if certs is not None:
            certs = [CpCertificate.from_json(c) for c in certs]
        return cls(
            cone,
            [decode_element(s, cone) for s in obj["states"]],
            [decode_element(r, cone) for r in obj["responses"]],
            certs,
        )


@dataclass
class OneWayProtocol:
    """Alice sends ``(b, w(x))``; on ``b = 1`` Bob measures ``M(y)`` and outputs ``outputs[y][i]``.

    ``abort[x]`` is ``p(b=1|x)``.  The canonical construction produces
    two-outcome measurements ``{e0, e1}`` with outputs ``(0, mu)``;
    general multi-outcome protocols are accepted as well.
    """

    system: GptSystem
    states: list
    abort: list
    measurements: list
    outputs: list
    lam: object = 1
    mu: object = 1
    certificates: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.states) != len(self.abort):
            raise ValueError("one abort probability per state")
        if len(self.measurements) != len(self.outputs):
            raise ValueError("one output table per measurement")
        for p in self.abort:
            if p < 0 or p > 1:
                raise ValueError("abort probabilities must lie in [0, 1]")
        for M, r in zip(self.measurements, self.outputs):
            if len(M) != len(r):
                raise ValueError("one output value per outcome")

    @property
    def num_x(self):
        return len(self.states)

    @property
    def num_y(self):
        return len(self.measurements)

    @property
    def max_output(self):
        return max(max(r) for r in self.outputs)

    def validate(self, tol: float = 1e-9):
        sys_ = self.system
        for x, s in enumerate(self.states):
            norm = sys_.normalization(s)
            if abs(norm - 1) > (0 if exact.is_exact(s) else 1e-10):
                raise ValueError(f"state {x} is not normalized")
            cert = self.certificates[x] if self.certificates is not None else None
            if contains(sys_.cone, s, tol, certificate=cert).verdict is Verdict.NOT_MEMBER:
                raise ValueError(f"state {x} is not in the cone")
        for M in self.measurements:
            M.validate(sys_, tol)


def _default_state(system: GptSystem):
    """A fixed normalized state: the first basis ray scaled by the unit."""
    K = system.cone
    u = system.unit
    if K.kind == "orthant":
        s = exact.zeros(K.ambient) if exact.is_exact(u) else np.zeros(K.ambient)
        s[0] = 1 / u[0]
        return s
    s = exact.zeros(K.shape) if exact.is_exact(u) else np.zeros(K.shape)
    s[0, 0] = 1 / u[0, 0]
    return s


def protocol_from_factorization(F: ConeFactorization, unit=None, tol: float = 1e-9) -> OneWayProtocol:
    """Compile a factorization into a protocol with ``E(r|xy) = C[x, y]``.

    ``lam = max_x <u, w(x)>`` sets the abort probabilities, ``mu`` is the
    smallest scale with ``mu u - lam r(y)`` in ``C*`` for every ``y``.  Bob's
    measurement is ``e1 = lam r(y)/mu``, ``e0 = u - e1`` with outputs
    ``(0, mu)``.
    """
    system = GptSystem(F.cone, unit)
    u = system.unit
    K = F.cone
    norms = [K.inner(u, s) for s in F.states]
    lam = max(norms)
    if lam < 0:
        raise ValueError("state outside the cone: negative normalization")
    if lam == 0:
        lam = Fraction(1) if exact.is_exact(u) else 1.0
    states, abort, certs = [], [], []
    for x, (s, nm) in enumerate(zip(F.states, norms)):
        if nm == 0 or _is_zero(s):
            states.append(_default_state(system))
            abort.append(nm * 0)
            certs.append(None)
            continue
        states.append(s / nm)
        abort.append(nm / lam)
        certs.append(F.certificates[x].scaled(1 / nm) if F.certificates is not None else None)
    if F.certificates is None:
        certs = None
    else:
        # the default state is e_1 e_1' / u_11
        d = K.ambient
        certs = [c if c is not None else CpCertificate((_basis(d, 0),), (1 / u[0, 0],)) for c in certs]
    dual = K.dual()
    mus = [min_scale_dominating(lam * r, u, dual, tol=tol) for r in F.responses]
    mu = max(mus)
    if mu == 0:
        mu = Fraction(1) if exact.is_exact(u) else 1.0
    measurements, outputs = [], []
    for r in F.responses:
        e1 = lam * r / mu
        e0 = u - e1
        measurements.append(Measurement([e0, e1], system, check=False))
        outputs.append([lam * 0, mu])
    P = OneWayProtocol(system, states, abort, measurements, outputs, lam, mu, certs)
    P.validate(tol)
    return P


def _basis(d, i):
    z = exact.zeros(d)
    z[i] = Fraction(1)
    return z


def exact_expectation(P: OneWayProtocol):
    """``E[x, y] = p(b=1|x) * sum_i r(i, y) <w(x), e_i(y)>``."""
    K = P.system.cone
    rows = []
    for s, p in zip(P.states, P.abort):
        row = []
        for M, r in zip(P.measurements, P.outputs):
            acc = 0
            for e, ri in zip(M.effects, r):
                if ri != 0:
                    acc = acc + ri * K.inner(s, e)
            row.append(p * acc)
        rows.append(row)
    flat = [v for row in rows for v in row]
    if all(isinstance(v, (Fraction, int)) for v in flat):
        return exact.exact_array(rows)
    return np.array(rows, dtype=float)


def sample(P: OneWayProtocol, x: int, y: int, rng: np.random.Generator, size: int | None = None):
    """Draw Bob's output for inputs ``(x, y)``.

    ``size=None`` returns one float, otherwise an array of ``size`` draws.
    """
    n = 1 if size is None else int(size)
    M = P.measurements[y]
    r = np.array([float(v) for v in P.outputs[y]])
    probs = np.asarray(outcome_distribution(P.states[x], M), dtype=float)
    probs = probs / probs.sum()
    sent = rng.random(n) < float(P.abort[x])
    outcome = rng.choice(len(probs), size=n, p=probs)
    out = np.where(sent, r[outcome], 0.0)
    return float(out[0]) if size is None else out


def factorization_from_protocol(P: OneWayProtocol) -> ConeFactorization:
    """``w(x) = p(b=1|x) w(x)`` and ``r(y) = sum_i r(i, y) e_i(y)``."""
    for y, r in enumerate(P.outputs):
        if any(v < 0 for v in r):
            raise ValueError(f"negative output value for y={y}: outputs must be nonnegative")
    states = [p * s for p, s in zip(P.abort, P.states)]
    responses = []
    for M, r in zip(P.measurements, P.outputs):
        acc = M.effects[0] * 0
        for e, ri in zip(M.effects, r):
            acc = acc + ri * e
        responses.append(acc)
    certs = None
    if P.certificates is not None:
        certs = [c.scaled(p) for c, p in zip(P.certificates, P.abort)]
    return ConeFactorization(P.system.cone, states, responses, certs)
