"""JSON encoding of scalars, vectors and matrices.

Matrices and vectors use ``{"rows": r, "cols": c, "data": [[...], ...]}``;
vectors are single columns.  Entries are JSON numbers or exact ``"p/q"``
strings.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np



def encode_scalar(v, exact: bool = True):
    if isinstance(v, (Fraction, int, np.integer)) and not isinstance(v, bool):
        v = Fraction(v)
        if not exact:
            return float(v)
        if v.denominator == 1:
            return int(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    return float(v)


def decode_scalar(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ValueError("booleans are not numeric entries")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(v[0], v[1])
    return float(v)


def encode_matrix(a, exact: bool = True):
    a = np.asarray(a)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError("only vectors and matrices can be encoded")
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[encode_scalar(v, exact) for v in row] for row in a],
    }


def decode_matrix(obj, vector: bool = False):
    """Decode a matrix object; ``vector=True`` flattens a single column or row.

    Bare nested lists are accepted as well.
    """
    data = obj["data"] if isinstance(obj, dict) else obj
    if data and not isinstance(data[0], list):
        data = [[v] for v in data]
    entries = [[decode_scalar(v) for v in row] for row in data]
    if isinstance(obj, dict):
        if len(entries) != obj["rows"] or any(len(r) != obj["cols"] for r in entries):
            raise ValueError("matrix data does not match the declared shape")
    all_exact = all(isinstance(v, Fraction) for row in entries for v in row)
    is_complex = any(isinstance(v, complex) for row in entries for v in row)
    if all_exact:
        arr = np.empty((len(entries), len(entries[0]) if entries else 0), dtype=object)
        for i, row in enumerate(entries):
            for j, v in enumerate(row):
                arr[i, j] = v
    else:
        arr = np.array([[complex(v) if is_complex else float(v) for v in row] for row in entries])
    if vector:
        arr = arr.reshape(-1)
    return arr


def encode_element(x, exact: bool = True):
    return encode_matrix(x, exact)


def decode_element(obj, cone):
    return decode_matrix(obj, vector=cone.kind == "orthant")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)

