"""Holevo capacity lower bounds against the log2(n) ceiling for a few systems."""

from conekit.gpt import GptSystem, capacity_bound, holevo_capacity_lower

for name, system in [
    ("classical n=3", GptSystem.classical(3)),
    ("classical n=4", GptSystem.classical(4)),
    ("qubit", GptSystem.quantum(2)),
]:
    res = holevo_capacity_lower(system, restarts=4, seed=0, iters=150)
    print(f"{name:14s} search={res.value:.6f} bound={capacity_bound(system):.6f}")

print("canonical classical n=4:", holevo_capacity_lower(GptSystem.classical(4), canonical=True).value)
