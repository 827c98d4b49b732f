"""Compile the stable-set circuit of a 3-node path to a face of COR(n) and
check its completely positive lift."""

from conekit.circuits import (
    compile_circuit,
    cp_extension_of_definable,
    face_projection,
    lower_to_nor,
    stable_set_circuit,
    validity_audit,
    vertex_set,
)

c = stable_set_circuit(3, [(1, 2), (2, 3)])
print("stable sets:", sorted(vertex_set(c)))

f = compile_circuit(lower_to_nor(c))
print(f"face of COR({f.n}) cut out by {len(f.equations)} equations")
print("projection matches:", sorted(face_projection(f)) == sorted(vertex_set(c)))
print("every equation valid on COR:", all(line.ok for line in validity_audit(f)))

lift = cp_extension_of_definable(c)
report = lift.verify()
print("CP lift mismatches:", report["mismatches"])
