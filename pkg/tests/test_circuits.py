from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conekit.circuits import (
    Circuit,
    CircuitError,
    EmptyPolytopeError,
    Gate,
    NorCircuit,
    compile_circuit,
    cp_extension_of_definable,
    evaluate,
    face_projection,
    face_vertices,
    lower_to_nor,
    parse_netlist,
    project,
    stable_set_circuit,
    validity_audit,
    vertex_set,
    write_netlist,
)
from conekit.cpext import vertex_lift
from conekit.polytopes import binary_vectors

from circuit_space import nor_circuits, random_advice_circuits

NOR1 = NorCircuit(2, [("g1", "y1", "y2")], "g1")
PATH3 = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1)]


def coeffs_of(eq):
    return {k: int(v) for k, v in eq.coeffs.items()}


def test_single_nor():
    assert vertex_set(NOR1) == [(0, 0)]
    f = compile_circuit(NOR1)
    assert f.n == 3
    nor, out = f.equations
    assert coeffs_of(nor) == {(1, 1): 1, (2, 2): 1, (1, 2): -1, (3, 3): 1, (1, 3): -2, (2, 3): -2}
    assert nor.rhs == 1
    assert coeffs_of(out) == {(3, 3): 1} and out.rhs == 1
    assert face_vertices(f) == [(0, 0, 1)]
    assert project(f).vertices == ((0, 0),)


def test_not_via_constant():
    c = NorCircuit(1, [("g1", "y1", "c0")], "g1")
    f = compile_circuit(c)
    nor, out = f.equations
    assert nor.kind == "NORc0"
    assert coeffs_of(nor) == {(1, 1): 1, (2, 2): 1, (1, 2): -2} and nor.rhs == 1
    assert coeffs_of(out) == {(2, 2): 1}
    ok = [a for a in product((0, 1), repeat=2) if nor.lhs(a) == 1 and out.lhs(a) == 1]
    assert ok == [(0, 1)]


def test_constant_one_gate():
    c = NorCircuit(1, [("g1", "y1", "c1"), ("g2", "y1", "g1")], "g2")
    f = compile_circuit(c)
    assert [e.kind for e in f.equations] == ["NORc1", "NOR", "output"]
    assert face_projection(f) == vertex_set(c) == [(0,)]


def test_nor_c1_equation():
    # the constant 1 arrives through an advice bit
    c = NorCircuit(1, [("g1", "y1", "x1"), ("g2", "y1", "y1")], "g2", advice=(1,))
    f = compile_circuit(c)
    eq = f.equations[0]
    assert eq.kind == "NORc1" and coeffs_of(eq) == {(f.wire_index["g1"], f.wire_index["g1"]): -1}
    assert eq.rhs == 0
    assert all(line.ok for line in validity_audit(f))
    assert face_projection(f) == vertex_set(c) == [(0,)]


def test_repeated_input_specialization():
    c = NorCircuit(1, [("g1", "y1", "y1")], "g1")
    f = compile_circuit(c)
    assert coeffs_of(f.equations[0]) == {(1, 1): 1, (2, 2): 1, (1, 2): -4}
    assert all(line.ok for line in validity_audit(f))


def test_validity_audit_tight_patterns():
    f = compile_circuit(NOR1)
    line = validity_audit(f)[0]
    assert line.max_lhs == 1 and line.ok
    tight = {a for a in binary_vectors(3) if line.equation.lhs(a) == 1}
    assert tight == {(1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1)}


def test_constant_folding_and_output():
    c = NorCircuit(1, [("g1", "c1", "c1")], "g1")
    assert vertex_set(c) == []
    with pytest.raises(CircuitError):
        compile_circuit(c)
    one = NorCircuit(2, [("g1", "x1", "x1")], "g1", advice=(0,))
    assert vertex_set(one) == list(binary_vectors(2))


def test_output_gate_is_last_index():
    c = NorCircuit(2, [("g1", "y1", "y2"), ("g2", "y1", "y1"), ("g3", "g1", "y2")], "g1")
    f = compile_circuit(c)
    assert f.wire_index["g1"] == f.n == 5


def test_path_graph_stable_sets():
    c = stable_set_circuit(3, [(1, 2), (2, 3)])
    assert sorted(vertex_set(c)) == sorted(PATH3)
    low = lower_to_nor(c)
    f = compile_circuit(low)
    assert sorted(face_projection(f)) == sorted(PATH3)
    assert all(line.ok for line in validity_audit(f))


def test_lowering_examples():
    low = lower_to_nor(Circuit(1, [Gate("n", "NOT", ("y1",))], "n"))
    assert low.gates == [("g1", "y1", "y1")]
    low = lower_to_nor(Circuit(2, [Gate("a", "AND", ("y1", "y2"))], "a"))
    assert len(low.gates) == 3
    xor = Circuit(
        2,
        [
            Gate("o", "OR", ("y1", "y2")),
            Gate("a", "AND", ("y1", "y2")),
            Gate("na", "NOT", ("a",)),
            Gate("x", "AND", ("o", "na")),
        ],
        "x",
    )
    low = lower_to_nor(xor)
    assert [evaluate(low, y) for y in binary_vectors(2)] == [0, 1, 1, 0]
    assert len(low.gates) <= 3 * 4


def test_cyclic_rejected():
    c = Circuit(1, [Gate("a", "NOT", ("b",)), Gate("b", "NOT", ("a",))], "a")
    with pytest.raises(CircuitError):
        lower_to_nor(c)


def test_unordered_nor_rejected():
    with pytest.raises(CircuitError):
        NorCircuit(1, [("g1", "g2", "y1"), ("g2", "y1", "y1")], "g1")


def random_circuit(draw, d, ops=("AND", "OR", "NOT", "NOR")):
    wires = [f"y{i}" for i in range(1, d + 1)] + ["c0", "c1"]
    gates = []
    for t in range(draw(st.integers(1, 8))):
        op = draw(st.sampled_from(ops))
        k = 1 if op == "NOT" else 2
        ins = tuple(draw(st.sampled_from(wires)) for _ in range(k))
        gates.append(Gate(f"h{t}", op, ins))
        wires.append(f"h{t}")
    return Circuit(d, gates, wires[-1])


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(1, 10))
def test_lowering_preserves_truth_table(data, d):
    c = random_circuit(data.draw, d)
    low = lower_to_nor(c)
    assert len(low.gates) <= 3 * len(c.gates)
    for y in binary_vectors(d):
        assert evaluate(low, y) == evaluate(c, y)


def test_exhaustive_equivalence_small():
    for d in (1, 2):
        for G in range(3):
            for c in nor_circuits(d, G):
                try:
                    f = compile_circuit(c)
                except CircuitError:
                    assert len(vertex_set(c)) in (0, 2**d)
                    continue
                assert face_projection(f) == vertex_set(c)
                assert all(line.ok for line in validity_audit(f))


def test_advice_instances():
    for c in random_advice_circuits(20, seed=1):
        try:
            f = compile_circuit(c)
        except CircuitError:
            assert len(vertex_set(c)) in (0, 2**c.d)
            continue
        assert face_projection(f) == vertex_set(c)


def test_empty_polytope():
    c = NorCircuit(1, [("g1", "y1", "y1"), ("g2", "y1", "g1")], "g2")
    assert vertex_set(c) == []
    with pytest.raises(EmptyPolytopeError):
        project(compile_circuit(c))
    with pytest.raises(EmptyPolytopeError):
        cp_extension_of_definable(c)


def test_cp_lift_single_nor():
    lift = cp_extension_of_definable(NOR1)
    assert len(lift.base.constraints) == 10
    assert len(lift.face_constraints) == 2
    assert lift.base.m == 7
    assert lift.is_feasible(vertex_lift((0, 0, 1))[0])
    assert not lift.is_feasible(vertex_lift((1, 0, 1))[0])
    report = lift.verify()
    assert report["mismatches"] == [] and report["projection"] == [(0, 0)]


def test_cp_lift_path_graph():
    lift = cp_extension_of_definable(stable_set_circuit(3, [(1, 2), (2, 3)]))
    report = lift.verify()
    assert report["mismatches"] == []
    assert sorted(report["projection"]) == sorted(PATH3)


NETLIST = """# single NOR
inputs 2
gate g1 NOR y1 y2
output g1
"""


def test_netlist_round_trip():
    c = parse_netlist(NETLIST)
    assert isinstance(c, NorCircuit) and c.gates == [("g1", "y1", "y2")]
    assert parse_netlist(write_netlist(c)) == c
    mixed = parse_netlist("inputs 2\nadvice 1\ngate a AND y1 x1\noutput a\n")
    assert isinstance(mixed, Circuit) and mixed.advice == (1,)
    assert vertex_set(mixed) == [(1, 0), (1, 1)]


@pytest.mark.parametrize(
    "text",
    [
        "gate g1 NOR y1 y2\noutput g1\n",
        "inputs 2\ngate g1 NOR y1 y2\n",
        "inputs 2\nadvice 12\noutput y1\n",
        "inputs 2\nwire x\noutput y1\n",
        "inputs 2\ngate g1 NOR y1 y3\noutput g1\n",
    ],
)
def test_netlist_errors(text):
    with pytest.raises(CircuitError):
        parse_netlist(text)
