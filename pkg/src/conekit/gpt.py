"""Generalized probabilistic theories over a cone.

A system is a state cone ``C`` with a unit effect ``u`` in the interior of the
dual cone.  Measurements are lists of dual-cone effects summing to ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import exact
from .cones import ConeOracle, Verdict, caratheodory_unit, contains, extremal_refine, is_interior, sym_eig

PROB_CLIP = 1e-12
FLOAT_SUM_TOL = 1e-10


class GptSystem:
    """State cone plus unit effect.

    ``use_J`` selects the all-ones matrix as unit for matrix cones (only
    meaningful for the completely positive cone, where ``J`` is copositive
    interior).
    """

    def __init__(self, cone: ConeOracle, unit=None, use_J: bool = False):
        self.cone = cone
        if unit is None:
            if use_J and cone.is_matrix:
                unit = exact.exact_array(np.ones(cone.shape, dtype=int))
            else:
                unit = cone.identity()
        self.unit = cone.check_shape(unit)
        if not is_interior(cone.dual(), self.unit):
            raise ValueError("unit effect must lie in the interior of the dual cone")

    @property
    def n(self) -> int:
        return self.cone.gpt_dim

    @property
    def dual(self) -> ConeOracle:
        return self.cone.dual()

    def __repr__(self):
        return f"GptSystem({self.cone.kind}, ambient={self.cone.ambient}, n={self.n})"

    @classmethod
    def classical(cls, n: int) -> "GptSystem":
        return cls(ConeOracle.orthant(n))

    @classmethod
    def quantum(cls, d: int, complex_: bool = True) -> "GptSystem":
        return cls(ConeOracle.psd(d, complex_))

    def normalization(self, omega):
        return self.cone.inner(self.unit, omega)


def _is_zero(x) -> bool:
    x = np.asarray(x)
    if x.dtype == object:
        return all(v == 0 for v in x.flat)
    return not np.any(x)


def _effect_sum(effects):
    total = effects[0]
    for e in effects[1:]:
        total = total + e
    return total


class Measurement:
    """Ordered effects ``e_1..e_m`` of ``C*`` with ``sum e_i = u``."""

    def __init__(self, effects, system: GptSystem | None = None, check: bool = True):
        if not len(effects):
            raise ValueError("a measurement needs at least one effect")
        self.effects = [np.asarray(e) for e in effects]
        self.system = system
        if check and system is not None:
            self.validate(system)

    def __len__(self):
        return len(self.effects)

    @property
    def is_exact(self) -> bool:
        return all(exact.is_exact(e) for e in self.effects)

    def validate(self, system: GptSystem, tol: float = 1e-9) -> None:
        K = system.cone
        for e in self.effects:
            K.check_shape(e)
        diff = _effect_sum(self.effects) - system.unit
        if self.is_exact and exact.is_exact(system.unit):
            if not _is_zero(diff):
                raise ValueError("effects do not sum to the unit")
        elif np.abs(exact.to_float(diff)).max() > FLOAT_SUM_TOL:
            raise ValueError("effects do not sum to the unit within 1e-10")
        Kd = system.dual
        for i, e in enumerate(self.effects):
            if contains(Kd, e, tol).verdict is Verdict.NOT_MEMBER:
                raise ValueError(f"effect {i} is not in the dual cone")

    def nonzero(self):
        return [i for i, e in enumerate(self.effects) if not _is_zero(e)]

    def to_json(self, exact_: bool = True):
        from .jsonio import encode_element

        out = {"effects": [encode_element(e, exact_) for e in self.effects]}
        if self.system is not None:
            out["system"] = self.system.cone.to_json()
            out["unit"] = encode_element(self.system.unit, exact_)
        return out

    @classmethod
    def from_json(cls, obj, system: GptSystem | None = None):
        from .jsonio import decode_element

        if system is None:
            cone = ConeOracle.from_json(obj["system"])
            unit = decode_element(obj["unit"], cone) if "unit" in obj else None
            system = GptSystem(cone, unit)
        effects = [decode_element(e, system.cone) for e in obj["effects"]]
        return cls(effects, system)


@dataclass
class MeasurementMixture:
    parts: list  # (weight, Measurement)

    def __post_init__(self):
        sizes = {len(m) for _, m in self.parts}
        if len(sizes) > 1:
            raise ValueError("all parts must have the same number of outcomes")

    @property
    def weights(self):
        return [w for w, _ in self.parts]

    def recombine(self):
        """Per-outcome convex combination of the parts."""
        m = len(self.parts[0][1])
        out = []
        for i in range(m):
            acc = None
            for w, M in self.parts:
                term = M.effects[i] * (w if isinstance(w, Fraction) and M.is_exact else float(w))
                acc = term if acc is None else acc + term
            out.append(acc)
        return out


@dataclass
class Ensemble:
    prior: np.ndarray
    states: list

    def validate(self, system: GptSystem, tol: float = FLOAT_SUM_TOL):
        p = np.asarray(self.prior, dtype=float)
        if np.any(p < -tol) or abs(p.sum() - 1) > tol:
            raise ValueError("prior is not a probability vector")
        for s in self.states:
            if abs(float(system.normalization(s)) - 1) > tol:
                raise ValueError("state is not normalized")


def outcome_distribution(omega, M: Measurement):
    """``P(i) = <e_i, omega>``; tiny negative float values are clipped."""
    K = M.system.cone if M.system is not None else None
    probs = []
    for e in M.effects:
        if K is not None:
            v = K.inner(e, omega)
        else:
            v = (np.asarray(e) * np.asarray(omega)).sum()
        probs.append(v)
    if all(isinstance(v, (Fraction, int)) for v in probs):
        probs = [Fraction(v) for v in probs]
        if any(v < 0 for v in probs):
            raise ValueError("negative outcome probability")
        if sum(probs) != 1:
            raise ValueError("state is not normalized")
        return np.array(probs, dtype=object)
    probs = np.array([float(v) for v in probs])
    if probs.min() < -PROB_CLIP:
        raise ValueError("negative outcome probability: invalid measurement or state")
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1) > FLOAT_SUM_TOL:
        raise ValueError("outcome probabilities do not sum to one")
    return probs


def _is_extremal(e, K: ConeOracle) -> bool:
    e = np.asarray(e)
    if K.kind == "orthant":
        return sum(1 for v in e if v != 0) <= 1
    if K.kind == "psd":
        if exact.is_exact(e):
            return exact.rank(e.tolist()) <= 1
        w, _ = sym_eig(e)
        scale = max(1.0, abs(w).max(initial=0.0))
        return int((w > 1e-12 * scale).sum()) <= 1
    raise ValueError("extremal rays not characterized for the %s cone" % K.kind)


def refine_measurement(M: Measurement, system: GptSystem):
    """Split every effect into extremal effects.

    Returns ``(M', outcome_map)`` where ``outcome_map[j]`` is the (0-based)
    outcome of ``M`` that refined outcome ``j`` came from.  Extremal effects
    are kept verbatim; zero effects contribute no outcome.
    """
    K = system.dual
    if K.kind not in ("orthant", "psd"):
        raise ValueError("refinement supported for orthant and psd systems only")
    effects, outcome_map = [], []
    for i, e in enumerate(M.effects):
        if _is_zero(e):
            continue
        parts = [e] if _is_extremal(e, K) else extremal_refine(e, K)
        effects.extend(parts)
        outcome_map.extend([i] * len(parts))
    return Measurement(effects, system, check=False), outcome_map


def group_distribution(probs, outcome_map, m: int):
    out = [0] * m
    for p, i in zip(probs, outcome_map):
        out[i] = out[i] + p
    return out


def decompose_measurement(M: Measurement, system: GptSystem) -> MeasurementMixture:
    """Write an extremal measurement as a mixture of measurements with at most ``n`` nonzero effects.

    Each step takes a basic solution ``lam >= 0`` of ``sum lam_i e_i = u``
    (at most ``n`` nonzeros), splits off ``{lam_i e_i}`` with weight
    ``1/lam_max`` and continues with the rescaled remainder, which has one
    nonzero effect fewer.
    """
    K = system.dual
    if K.kind not in ("orthant", "psd"):
        raise ValueError("decomposition supported for orthant and psd systems only")
    for i in M.nonzero():
        if not _is_extremal(M.effects[i], K):
            raise ValueError(f"effect {i} is not extremal; refine the measurement first")
    n = system.n
    m = len(M)
    exact_mode = M.is_exact and exact.is_exact(system.unit)

    def scale(e, c):
        return e * c if exact_mode else e * float(c)

    effects = list(M.effects)
    remaining = Fraction(1)
    parts = []
    while True:
        nz = [i for i in range(m) if not _is_zero(effects[i])]
        if len(nz) <= n:
            parts.append((remaining, Measurement(effects, system, check=False)))
            break
        lam_nz = caratheodory_unit([effects[i] for i in nz], system.unit, K)
        lam = [Fraction(0)] * m
        for i, v in zip(nz, lam_nz):
            lam[i] = v
        lmax = max(lam)
        if lmax <= 1:
            raise AssertionError("lambda_max <= 1 with more than n nonzero effects")
        p = 1 / lmax
        m1 = [scale(effects[i], lam[i]) for i in range(m)]
        m2 = [scale(effects[i], (1 - lam[i] / lmax) / (1 - p)) for i in range(m)]
        parts.append((remaining * p, Measurement(m1, system, check=False)))
        remaining *= 1 - p
        effects = m2
    if not exact_mode:
        parts = [(float(w), part) for w, part in parts]
    return MeasurementMixture(parts)


# -- information theory -----------------------------------------------------


def _entropy(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information(p, W) -> float:
    """``I(X;Y)`` in bits for prior ``p`` and channel rows ``W[x] = P(y|x)``."""
    p = np.asarray(p, dtype=float)
    W = np.asarray(W, dtype=float)
    py = p @ W
    hyx = sum(px * _entropy(row) for px, row in zip(p, W) if px > 0)
    return max(0.0, _entropy(py) - hyx)


def blahut_arimoto(W, tol: float = 1e-12, max_iter: int = 20000):
    """Channel capacity (bits) and an optimal prior."""
    W = np.asarray(W, dtype=float)
    nx = W.shape[0]
    p = np.full(nx, 1.0 / nx)
    logW = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)), 0.0)
    for _ in range(max_iter):
        q = p @ W
        logq = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), 0.0)
        D = (W * (logW - logq)).sum(axis=1)
        c = np.exp(D)
        upper = np.log(c.max())
        lower = np.log(p @ c)
        p = p * c
        p /= p.sum()
        if upper - lower < tol:
            break
    return mutual_information(p, W), p


def capacity_bound(system: GptSystem) -> float:
    """Upper bound ``log2 n`` on the single-shot Holevo capacity."""
    return float(np.log2(system.n))


def channel_matrix(states, M: Measurement):
    return np.array([np.asarray(outcome_distribution(s, M), dtype=float) for s in states])


def ensemble_capacity(states, M: Measurement):
    """Best mutual information over priors for fixed states and measurement."""
    return blahut_arimoto(channel_matrix(states, M))


class CapacityResult(NamedTuple):
    value: float
    ensemble: Ensemble
    measurement: Measurement
    restart: int


# -- capacity search --------------------------------------------------------


class _Classical:
    """Search parametrization for the orthant."""

    def __init__(self, system, nx, m, rng):
        self.u = exact.to_float(system.unit)
        self.n = len(self.u)
        self.nx, self.m, self.rng = nx, m, rng

    def random(self):
        S = self.rng.dirichlet(np.ones(self.n), size=self.nx)
        E = self.rng.random((self.m, self.n))
        return self.repair(S, E)

    def repair(self, S, E):
        S = np.clip(S, 0, None) + 1e-300
        S = S / (S @ self.u)[:, None]
        E = np.clip(E, 0, None)
        # a coordinate no effect covers goes entirely to one effect
        for j in np.flatnonzero(E.sum(axis=0) == 0):
            E[self.rng.integers(self.m), j] = 1.0
        E = E / E.sum(axis=0) * self.u
        return S, E

    def states(self, S):
        return list(S)

    def effects(self, E):
        return list(E)

    def perturb(self, S, E, step):
        S, E = S.copy(), E.copy()
        kind = self.rng.integers(4)
        if kind == 0:
            x = self.rng.integers(self.nx)
            S[x] += step * self.rng.standard_normal(self.n)
        elif kind == 1:
            i = self.rng.integers(self.m)
            E[i] += step * self.rng.standard_normal(self.n)
        elif kind == 2:
            x = self.rng.integers(self.nx)
            S[x] = 0
            S[x, self.rng.integers(self.n)] = 1
        else:
            j = self.rng.integers(self.n)
            E[:, j] = 0
            E[self.rng.integers(self.m), j] = 1
        return self.repair(S, E)


class _Quantum:
    """Search parametrization for psd cones: states ``G G*``, effects ``u^1/2 S^-1/2 A_i S^-1/2 u^1/2``."""

    def __init__(self, system, nx, m, rng):
        self.u = exact.to_float(system.unit)
        self.d = self.u.shape[0]
        self.cplx = system.cone.field == "complex"
        wu, Vu = np.linalg.eigh(self.u)
        self.usqrt = (Vu * np.sqrt(wu)) @ Vu.conj().T
        self.nx, self.m, self.rng = nx, m, rng

    def _gauss(self, *shape):
        g = self.rng.standard_normal(shape)
        if self.cplx:
            g = g + 1j * self.rng.standard_normal(shape)
        return g

    def random(self):
        return self.repair(self._gauss(self.nx, self.d, self.d), self._gauss(self.m, self.d, self.d))

    def repair(self, G, H):
        return G, H

    def states(self, G):
        out = []
        for g in G:
            rho = g @ g.conj().T
            rho = rho / np.real(np.trace(self.u @ rho))
            out.append((rho + rho.conj().T) / 2)
        return out

    def effects(self, H):
        A = [h @ h.conj().T + 1e-12 * np.eye(self.d) for h in H]
        S = sum(A)
        w, V = np.linalg.eigh(S)
        Sinv = (V / np.sqrt(w)) @ V.conj().T
        T = self.usqrt @ Sinv
        out = [T @ a @ T.conj().T for a in A]
        return [(e + e.conj().T) / 2 for e in out]

    def perturb(self, G, H, step):
        G, H = G.copy(), H.copy()
        kind = self.rng.integers(4)
        if kind == 0:
            x = self.rng.integers(self.nx)
            G[x] += step * self._gauss(self.d, self.d)
        elif kind == 1:
            i = self.rng.integers(self.m)
            H[i] += step * self._gauss(self.d, self.d)
        elif kind == 2:
            # pure state
            x = self.rng.integers(self.nx)
            v = self._gauss(self.d, 1)
            G[x] = np.hstack([v, np.zeros((self.d, self.d - 1))])
        else:
            i = self.rng.integers(self.m)
            v = self._gauss(self.d, 1)
            H[i] = np.hstack([v, np.zeros((self.d, self.d - 1))])
        return G, H


def _canonical(system: GptSystem):
    K = system.cone
    if K.kind == "orthant":
        n = K.ambient
        u = system.unit
        states, effects = [], []
        for i in range(n):
            s = exact.zeros(n)
            s[i] = 1 / exact.frac(u[i])
            e = exact.zeros(n)
            e[i] = exact.frac(u[i])
            states.append(s)
            effects.append(e)
        return states, effects
    if not _is_identity(system.unit):
        raise ValueError("canonical construction needs the identity unit")
    d = K.ambient
    states = []
    for i in range(d):
        e = exact.zeros((d, d))
        e[i, i] = Fraction(1)
        states.append(e)
    return states, [s.copy() for s in states]


def _is_identity(u):
    u = np.asarray(u)
    return u.ndim == 2 and all(u[i, j] == (1 if i == j else 0) for i in range(u.shape[0]) for j in range(u.shape[1]))


def holevo_capacity_lower(
    system: GptSystem,
    num_inputs: int | None = None,
    num_outcomes: int | None = None,
    restarts: int = 8,
    seed: int = 0,
    iters: int = 300,
    canonical: bool = False,
) -> CapacityResult:
    """Search-based lower estimate of the single-shot Holevo capacity.

    Each restart starts from a random feasible point and hill-climbs over
    states and effects (Gaussian moves plus moves to extreme points), with the
    prior optimized exactly by Blahut-Arimoto.  Restarts use independent
    child seeds; the best value wins, ties going to the lowest restart.
    ``canonical=True`` skips the search and evaluates the standard
    distinguishable-states construction.
    """
    K = system.cone
    if K.kind not in ("orthant", "psd"):
        raise ValueError("capacity search supported for orthant and psd systems only")
    if canonical:
        states, effects = _canonical(system)
        M = Measurement(effects, system)
        # noiseless channel, so the uniform prior is optimal
        prior = np.full(len(states), 1.0 / len(states))
        value = mutual_information(prior, channel_matrix(states, M))
        return CapacityResult(value, Ensemble(prior, states), M, -1)
    Param = _Classical if K.kind == "orthant" else _Quantum
    nx = num_inputs or K.ambient
    m = num_outcomes or K.ambient
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        par = Param(system, nx, m, rng)
        A, B = par.random()

        def score(A, B):
            states = par.states(A)
            M = Measurement(par.effects(B), system, check=False)
            val, prior = blahut_arimoto(channel_matrix(states, M), tol=1e-10, max_iter=2000)
            return val, prior, states, M

        cur = score(A, B)
        step = 0.5
        for _ in range(iters):
            A2, B2 = par.perturb(A, B, step)
            cand = score(A2, B2)
            if cand[0] >= cur[0]:
                A, B, cur = A2, B2, cand
            else:
                step = max(step * 0.97, 1e-3)
        val, prior, states, M = cur
        # polish the prior to full precision
        val, prior = blahut_arimoto(channel_matrix(states, M))
        if best is None or val > best.value:
            best = CapacityResult(val, Ensemble(prior, states), M, r)
    return best
