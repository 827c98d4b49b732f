"""Enumeration of small NOR circuits for exhaustive checks."""

from itertools import combinations_with_replacement

import numpy as np

from conekit.circuits import NorCircuit


def nor_circuits(d, num_gates, advice=()):
    """Every NOR circuit on ``d`` inputs with exactly ``num_gates`` gates.

    Gate inputs are unordered pairs (repetition allowed) of inputs, constants,
    advice wires and earlier gates; the output is any input or gate.
    """
    base = [f"y{i}" for i in range(1, d + 1)] + ["c0", "c1"] + [f"x{i}" for i in range(1, len(advice) + 1)]

    def extend(gates, wires):
        if len(gates) == num_gates:
            for out in [f"y{i}" for i in range(1, d + 1)] + [g[0] for g in gates]:
                yield NorCircuit(d, list(gates), out, advice)
            return
        name = f"g{len(gates) + 1}"
        for a, b in combinations_with_replacement(wires, 2):
            yield from extend(gates + [(name, a, b)], wires + [name])

    yield from extend([], base)


def random_advice_circuits(count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, 4))
        G = int(rng.integers(1, 4))
        advice = tuple(int(b) for b in rng.integers(0, 2, size=k))
        wires = [f"y{i}" for i in range(1, d + 1)] + ["c0", "c1"] + [f"x{i}" for i in range(1, k + 1)]
        gates = []
        for t in range(1, G + 1):
            a, b = rng.choice(len(wires), size=2)
            gates.append((f"g{t}", wires[a], wires[b]))
            wires.append(f"g{t}")
        out.append(NorCircuit(d, gates, f"g{G}", advice))
    return out
