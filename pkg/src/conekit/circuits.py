"""NOR circuits and their compilation to faces of the correlation polytope.

A circuit with inputs ``y1..yd`` (and advice bits fixed as constants)
recognizes a set of 0/1 points.  Every surviving NOR gate becomes a variable
of COR(n) and contributes one valid equation; intersecting COR(n) with these
hyperplanes and the output equation gives a face whose projection onto the
input diagonal is the convex hull of the accepted points.

Wire names: inputs ``y1..yd``, advice ``x1..xk``, constants ``c0``/``c1``,
gates by their own names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .cpext import cp_extension_constraints, satisfies_all, sparse_constraints, vertex_lift
from .polytopes import ZeroOnePolytope, binary_vectors

MAX_VERIFY_N = 16
CONSTS = {"c0": 0, "c1": 1}


class CircuitError(ValueError):
    pass


class EmptyPolytopeError(CircuitError):
    """The circuit accepts no input."""


@dataclass(frozen=True)
class Gate:
    name: str
    op: str
    inputs: tuple


@dataclass
class Circuit:
    """Circuit over AND, OR, NOT and NOR gates (fan-in two, NOT fan-in one)."""

    d: int
    gates: list
    output: str
    advice: tuple = ()

    def __post_init__(self):
        self.advice = tuple(int(b) for b in self.advice)
        names = [g.name for g in self.gates]
        if len(set(names)) != len(names):
            raise CircuitError("duplicate gate name")
        arity = {"AND": 2, "OR": 2, "NOR": 2, "NOT": 1}
        for g in self.gates:
            if g.op not in arity:
                raise CircuitError(f"unknown gate type {g.op}")
            if len(g.inputs) != arity[g.op]:
                raise CircuitError(f"gate {g.name}: {g.op} takes {arity[g.op]} inputs")
            if _is_source(g.name, self.d, len(self.advice)):
                raise CircuitError(f"gate name {g.name} clashes with an input or constant")


def _is_source(w, d, k):
    if w in CONSTS:
        return True
    m = re.fullmatch(r"([yx])(\d+)", w)
    if not m:
        return False
    i = int(m.group(2))
    return 1 <= i <= (d if m.group(1) == "y" else k)


def _source_value(w, y, advice):
    if w in CONSTS:
        return CONSTS[w]
    i = int(w[1:]) - 1
    return y[i] if w[0] == "y" else advice[i]


def _topo_order(c: Circuit):
    by_name = {g.name: g for g in c.gates}
    k = len(c.advice)
    state = {}
    order = []

    def visit(name):
        stack = [(name, False)]
        while stack:
            w, done = stack.pop()
            if done:
                state[w] = 2
                order.append(by_name[w])
                continue
            if state.get(w) == 2:
                continue
            if state.get(w) == 1:
                raise CircuitError("circuit is cyclic")
            state[w] = 1
            stack.append((w, True))
            for src in by_name[w].inputs:
                if _is_source(src, c.d, k):
                    continue
                if src not in by_name:
                    raise CircuitError(f"unknown wire {src}")
                if state.get(src) == 1:
                    raise CircuitError("circuit is cyclic")
                if state.get(src) != 2:
                    stack.append((src, False))

    for g in c.gates:
        if state.get(g.name) != 2:
            visit(g.name)
    if c.output not in by_name and not _is_source(c.output, c.d, k):
        raise CircuitError(f"unknown output wire {c.output}")
    return order


@dataclass
class NorCircuit:
    """Topologically ordered NOR gates ``(name, a, b)``; advice bits are constants."""

    d: int
    gates: list
    output: str
    advice: tuple = ()

    def __post_init__(self):
        self.advice = tuple(int(b) for b in self.advice)
        self.gates = [tuple(g) for g in self.gates]
        seen = set()
        k = len(self.advice)
        for name, a, b in self.gates:
            if _is_source(name, self.d, k) or name in seen:
                raise CircuitError(f"bad or duplicate gate name {name}")
            for w in (a, b):
                if not (_is_source(w, self.d, k) or w in seen):
                    raise CircuitError(f"gate {name} reads {w} before it is defined")
            seen.add(name)
        if not (_is_source(self.output, self.d, k) or self.output in seen):
            raise CircuitError(f"unknown output wire {self.output}")

    def as_circuit(self) -> Circuit:
        return Circuit(self.d, [Gate(n, "NOR", (a, b)) for n, a, b in self.gates], self.output, self.advice)


# -- lowering ---------------------------------------------------------------


class _Lowerer:
    def __init__(self, d, advice):
        self.d = d
        self.advice = advice
        self.gates = []
        self.cache = {}
        self.neg = {}  # wire -> wire it negates

    def src(self, w):
        if w in CONSTS:
            return w
        if w[0] == "x":
            return "c1" if self.advice[int(w[1:]) - 1] else "c0"
        return w

    def nor(self, a, b):
        if "c1" in (a, b):
            return "c0"
        if a == "c0" and b == "c0":
            return "c1"
        if a == "c0":
            return self.not_(b)
        if b == "c0":
            return self.not_(a)
        if a == b:
            return self.not_(a)
        key = tuple(sorted((a, b)))
        if key not in self.cache:
            name = f"g{len(self.gates) + 1}"
            self.gates.append((name, a, b))
            self.cache[key] = name
        return self.cache[key]

    def not_(self, a):
        if a in CONSTS:
            return "c0" if a == "c1" else "c1"
        if a in self.neg:
            return self.neg[a]
        key = (a, a)
        if key not in self.cache:
            name = f"g{len(self.gates) + 1}"
            self.gates.append((name, a, a))
            self.cache[key] = name
            self.neg[name] = a
        return self.cache[key]


def lower_to_nor(c: Circuit) -> NorCircuit:
    """Rewrite with ``NOT a = NOR(a,a)``, ``OR = NOT NOR``, ``AND(a,b) = NOR(NOT a, NOT b)``.

    Advice bits become constants, constant inputs are propagated, double
    negations cancel, identical gates are shared and gates not feeding the
    output are dropped.
    """
    order = _topo_order(c)
    low = _Lowerer(c.d, c.advice)
    wire = {}

    def get(w):
        return wire[w] if w in wire else low.src(w)

    for g in order:
        ins = [get(w) for w in g.inputs]
        if g.op == "NOT":
            out = low.not_(ins[0])
        elif g.op == "NOR":
            out = low.nor(*ins)
        elif g.op == "OR":
            out = low.not_(low.nor(*ins))
        else:
            out = low.nor(low.not_(ins[0]), low.not_(ins[1]))
        wire[g.name] = out
    output = get(c.output)
    # dead-code elimination
    live = set()
    by_name = {n: (a, b) for n, a, b in low.gates}
    stack = [output]
    while stack:
        w = stack.pop()
        if w in by_name and w not in live:
            live.add(w)
            stack.extend(by_name[w])
    gates = [g for g in low.gates if g[0] in live]
    return NorCircuit(c.d, gates, output, c.advice)


# -- evaluation -------------------------------------------------------------


def evaluate(c, y) -> int:
    y = tuple(int(v) for v in y)
    if len(y) != c.d:
        raise CircuitError("input length does not match the circuit")
    if isinstance(c, NorCircuit):
        val = {}

        def get(w):
            return val[w] if w in val else _source_value(w, y, c.advice)

        for name, a, b in c.gates:
            val[name] = int(not (get(a) or get(b)))
        return get(c.output)
    val = {}

    def get(w):
        return val[w] if w in val else _source_value(w, y, c.advice)

    for g in _topo_order(c):
        ins = [get(w) for w in g.inputs]
        if g.op == "NOT":
            v = 1 - ins[0]
        elif g.op == "NOR":
            v = int(not (ins[0] or ins[1]))
        elif g.op == "OR":
            v = int(ins[0] or ins[1])
        else:
            v = int(ins[0] and ins[1])
        val[g.name] = v
    return get(c.output)


def vertex_set(c) -> list:
    """Accepted inputs in enumeration order (possibly empty)."""
    if c.d > 16:
        raise ValueError("vertex_set enumerates 2^d inputs; d <= 16 required")
    return [y for y in binary_vectors(c.d) if evaluate(c, y)]


def definable_polytope(c) -> ZeroOnePolytope:
    vs = vertex_set(c)
    if not vs:
        raise EmptyPolytopeError("circuit accepts no input: the polytope is empty")
    return ZeroOnePolytope(c.d, tuple(vs))


# -- compilation ------------------------------------------------------------


@dataclass
class FaceEquation:
    """``sum coeffs[(i, j)] z_ij = rhs`` with 1-based ``i <= j``."""

    coeffs: dict
    rhs: int
    kind: str
    gate: tuple = ()  # (k, i, j) or (k, i, const) or (o,)

    def lhs(self, a):
        return sum(c * a[i - 1] * a[j - 1] for (i, j), c in self.coeffs.items())

    def holds_relation(self, a) -> bool:
        """The gate relation this equation encodes."""
        if self.kind == "output":
            return a[self.gate[0] - 1] == 1
        k = self.gate[0]
        if self.kind == "NORc1":
            return a[k - 1] == 0
        if self.kind == "NORc0":
            return a[k - 1] == 1 - a[self.gate[1] - 1]
        i, j = self.gate[1], self.gate[2]
        return a[k - 1] == int(not (a[i - 1] or a[j - 1]))

    def text(self):
        terms = []
        for (i, j), c in sorted(self.coeffs.items()):
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            terms.append(f"{sign}{mag}z{i},{j}")
        s = " ".join(terms).lstrip("+")
        return f"{s} = {self.rhs}"


def _add(coeffs, i, j, c):
    key = (min(i, j), max(i, j))
    coeffs[key] = coeffs.get(key, 0) + c
    if coeffs[key] == 0:
        del coeffs[key]


@dataclass
class CompiledFace:
    n: int
    d: int
    equations: list
    wire_index: dict
    advice: tuple = ()
    gates: list = field(default_factory=list)

    def contains(self, a) -> bool:
        return all(eq.lhs(a) == eq.rhs for eq in self.equations)


def compile_circuit(c: NorCircuit) -> CompiledFace:
    """Fold constant gates, index wires and emit one equation per surviving gate plus the output equation.

    Inputs take indices ``1..d``; surviving gates follow in circuit order,
    except that the output gate is moved to index ``n``.
    """
    if not isinstance(c, NorCircuit):
        raise CircuitError("compile expects a NOR circuit; lower it first")
    const = {}
    surviving = []
    k = len(c.advice)

    def resolve(w):
        if w in const:
            return ("c", const[w])
        if w in CONSTS:
            return ("c", CONSTS[w])
        if w[0] == "x" and _is_source(w, c.d, k):
            return ("c", c.advice[int(w[1:]) - 1])
        return ("w", w)

    for name, a, b in c.gates:
        ra, rb = resolve(a), resolve(b)
        if ra[0] == "c" and rb[0] == "c":
            const[name] = int(not (ra[1] or rb[1]))
        else:
            surviving.append((name, ra, rb))
    out = resolve(c.output)
    if out[0] == "c":
        raise CircuitError(f"output is the constant {out[1]}: the polytope is trivial or empty")
    index = {f"y{i}": i for i in range(1, c.d + 1)}
    names = [s[0] for s in surviving]
    if c.output in names:
        names.remove(c.output)
        names.append(c.output)
    for t, name in enumerate(names):
        index[name] = c.d + 1 + t
    n = c.d + len(names)
    eqs = []
    for name, ra, rb in surviving:
        kk = index[name]
        wires = [r for r in (ra, rb) if r[0] == "w"]
        consts = [r[1] for r in (ra, rb) if r[0] == "c"]
        coeffs = {}
        if consts and consts[0] == 1:
            _add(coeffs, kk, kk, -1)
            eqs.append(FaceEquation(coeffs, 0, "NORc1", (kk,)))
        elif consts:
            i = index[wires[0][1]]
            _add(coeffs, i, i, 1)
            _add(coeffs, kk, kk, 1)
            _add(coeffs, i, kk, -2)
            eqs.append(FaceEquation(coeffs, 1, "NORc0", (kk, i)))
        else:
            i, j = index[wires[0][1]], index[wires[1][1]]
            _add(coeffs, i, i, 1)
            _add(coeffs, j, j, 1)
            if i == j:
                _add(coeffs, i, i, -1)
            else:
                _add(coeffs, i, j, -1)
            _add(coeffs, kk, kk, 1)
            _add(coeffs, i, kk, -2)
            _add(coeffs, j, kk, -2)
            eqs.append(FaceEquation(coeffs, 1, "NOR", (kk, i, j)))
    o = index[out[1]]
    eqs.append(FaceEquation({(o, o): 1}, 1, "output", (o,)))
    gates = [(index[name], ra, rb) for name, ra, rb in surviving]
    return CompiledFace(n, c.d, eqs, index, c.advice, gates)


def _all_points(n):
    if n > MAX_VERIFY_N:
        raise ValueError(f"enumeration limited to n <= {MAX_VERIFY_N}")
    pts = np.array(list(binary_vectors(n)), dtype=np.int64).reshape(-1, n)
    return pts


def _lhs_all(eq: FaceEquation, pts):
    out = np.zeros(len(pts), dtype=np.int64)
    for (i, j), c in eq.coeffs.items():
        out += int(c) * pts[:, i - 1] * pts[:, j - 1]
    return out


def face_vertices(f: CompiledFace) -> list:
    """All ``a`` in ``{0,1}^n`` whose lift ``aa'`` satisfies every equation."""
    pts = _all_points(f.n)
    ok = np.ones(len(pts), dtype=bool)
    for eq in f.equations:
        ok &= _lhs_all(eq, pts) == eq.rhs
    return [tuple(int(v) for v in p) for p in pts[ok]]


def face_projection(f: CompiledFace) -> list:
    """Projected vertex set ``{a[:d]}`` in enumeration order."""
    seen = {a[: f.d] for a in face_vertices(f)}
    return [y for y in binary_vectors(f.d) if y in seen]


def project(f: CompiledFace) -> ZeroOnePolytope:
    vs = face_projection(f)
    if not vs:
        raise EmptyPolytopeError("the compiled face is empty")
    return ZeroOnePolytope(f.d, tuple(vs))


@dataclass
class AuditLine:
    equation: FaceEquation
    max_lhs: int
    valid: bool
    tight_iff_relation: bool

    @property
    def ok(self):
        return self.valid and self.tight_iff_relation


def validity_audit(f: CompiledFace) -> list:
    """For each equation: max of the lhs over COR(n) vertices equals the rhs, tight exactly where the gate relation holds."""
    pts = _all_points(f.n)
    lines = []
    for eq in f.equations:
        vals = _lhs_all(eq, pts)
        mx = int(vals.max())
        tight = vals == eq.rhs
        rel = np.array([eq.holds_relation(p) for p in pts])
        lines.append(AuditLine(eq, mx, mx == eq.rhs, bool(np.array_equal(tight, rel))))
    return lines


# -- completely positive extension -------------------------------------------


@dataclass
class DefinableLift:
    """Completely positive lift of COR(n) cut by the compiled face equations on the ``x`` block of ``Y``."""

    face: CompiledFace
    base: object  # CpLift
    face_constraints: list  # (name, A, rhs)
    _sparse: list = field(default=None, init=False, repr=False)

    @property
    def n(self):
        return self.face.n

    @property
    def d(self):
        return self.face.d

    @property
    def constraints(self):
        return list(self.base.constraints) + list(self.face_constraints)

    def is_feasible(self, Y) -> bool:
        if self._sparse is None:
            self._sparse = sparse_constraints(self.constraints)
        return satisfies_all(self._sparse, Y)

    def project(self, Y):
        """Input coordinates ``Y_ii``, ``i = 1..d``."""
        return tuple(int(Y[i, i]) for i in range(1, self.d + 1))

    def verify(self):
        """Exactly the face vertices lift to feasible points; their projections form the polytope."""
        face = set(face_vertices(self.face))
        feasible, wrong = [], []
        for a in binary_vectors(self.n):
            Y, _ = vertex_lift(a)
            ok = self.is_feasible(Y)
            if ok:
                feasible.append(a)
            if ok != (a in face):
                wrong.append(a)
        proj = sorted({self.project(vertex_lift(a)[0]) for a in feasible})
        return {"feasible": feasible, "mismatches": wrong, "projection": proj}

    def to_json(self):
        from .jsonio import encode_matrix, encode_scalar

        out = self.base.to_json()
        out["face_constraints"] = [
            {"name": name, "A": encode_matrix(A), "rhs": encode_scalar(rhs)} for name, A, rhs in self.face_constraints
        ]
        out["d"] = self.d
        return out


def cp_extension_of_definable(c) -> DefinableLift:
    """Compile ``c`` and rewrite the face equations over the lift (``z_ij`` becomes ``Y_ij``)."""
    if isinstance(c, Circuit):
        c = lower_to_nor(c)
    if not vertex_set(c):
        raise EmptyPolytopeError("circuit accepts no input: the polytope is empty")
    f = compile_circuit(c)
    base = cp_extension_constraints(f.n)
    m = 1 + 2 * f.n
    cons = []
    for t, eq in enumerate(f.equations):
        A = exact.zeros((m, m))
        for (i, j), coef in eq.coeffs.items():
            if i == j:
                A[i, i] += Fraction(coef)
            else:
                A[i, j] += Fraction(coef, 2)
                A[j, i] += Fraction(coef, 2)
        cons.append((f"face_{t + 1}_{eq.kind}", A, Fraction(eq.rhs)))
    return DefinableLift(f, base, cons)


# -- netlist format -----------------------------------------------------------


def parse_netlist(text: str):
    """Parse ``inputs``/``advice``/``gate``/``output`` directives.

    Returns a :class:`NorCircuit` when every gate is NOR, otherwise a
    :class:`Circuit`.  ``#`` starts a comment.
    """
    d = None
    advice = ()
    gates = []
    output = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0].lower()
        try:
            if key == "inputs":
                (d,) = parts[1:]
                d = int(d)
            elif key == "advice":
                bits = "".join(parts[1:])
                if bits and set(bits) - {"0", "1"}:
                    raise ValueError("advice must be a bitstring")
                advice = tuple(int(b) for b in bits)
            elif key == "gate":
                name, op, *ins = parts[1:]
                gates.append(Gate(name, op.upper(), tuple(ins)))
            elif key == "output":
                (output,) = parts[1:]
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except ValueError as err:
            raise CircuitError(f"line {lineno}: {err}") from None
    if d is None:
        raise CircuitError("missing 'inputs' directive")
    if output is None:
        raise CircuitError("missing 'output' directive")
    if all(g.op == "NOR" for g in gates):
        for g in gates:
            if len(g.inputs) != 2:
                raise CircuitError(f"gate {g.name}: NOR takes 2 inputs")
        return NorCircuit(d, [(g.name, *g.inputs) for g in gates], output, advice)
    return Circuit(d, gates, output, advice)


def write_netlist(c) -> str:
    lines = [f"inputs {c.d}"]
    if c.advice:
        lines.append("advice " + "".join(str(b) for b in c.advice))
    if isinstance(c, NorCircuit):
        lines += [f"gate {n} NOR {a} {b}" for n, a, b in c.gates]
    else:
        lines += [f"gate {g.name} {g.op} {' '.join(g.inputs)}" for g in c.gates]
    lines.append(f"output {c.output}")
    return "\n".join(lines) + "\n"


def stable_set_circuit(num_nodes: int, edges) -> Circuit:
    """Accepts exactly the stable sets of a graph; edge indicators are advice bits.

    Advice bit order: pairs ``(i, j)``, ``i < j``, lexicographic, 1-based nodes.
    """
    pairs = [(i, j) for i in range(1, num_nodes + 1) for j in range(i + 1, num_nodes + 1)]
    edges = {tuple(sorted(e)) for e in edges}
    advice = tuple(int(p in edges) for p in pairs)
    gates = []
    oks = []
    for t, (i, j) in enumerate(pairs, 1):
        gates.append(Gate(f"both{i}{j}", "AND", (f"y{i}", f"y{j}")))
        gates.append(Gate(f"bad{i}{j}", "AND", (f"x{t}", f"both{i}{j}")))
        gates.append(Gate(f"ok{i}{j}", "NOT", (f"bad{i}{j}",)))
        oks.append(f"ok{i}{j}")
    if not oks:
        return Circuit(num_nodes, [Gate("out", "OR", ("c1", "c1"))], "out", advice)
    acc = oks[0]
    for t, w in enumerate(oks[1:], 1):
        gates.append(Gate(f"all{t}", "AND", (acc, w)))
        acc = f"all{t}"
    return Circuit(num_nodes, gates, acc, advice)


compile = compile_circuit  # noqa: A001
