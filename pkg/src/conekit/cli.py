"""``conekit`` command line entry point.

Exit codes: 0 success, 1 verification failure or module error (with a JSON
diagnostics object on stdout), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, exact
from .jsonio import decode_matrix, encode_matrix, encode_scalar

GLOBAL_DEFAULTS = {"seed": 0, "tol": None, "exact": False, "out": None, "format": "json"}


class VerificationFailure(Exception):
    def __init__(self, invariant, payload=None):
        super().__init__(invariant)
        self.invariant = invariant
        self.payload = payload or {}


def _common(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="random seed")
    parser.add_argument("--tol", type=float, default=d, help="numerical tolerance")
    parser.add_argument("--exact", action="store_true", default=d, help="emit exact p/q strings")
    parser.add_argument("--out", default=d, help="write the primary JSON output here")
    parser.add_argument("--format", choices=("json", "text"), default=d)


def build_parser():
    parser = argparse.ArgumentParser(prog="conekit", description="Cone factorizations, GPT protocols and CP lifts.")
    parser.add_argument("--version", action="version", version=f"conekit {__version__}")
    _common(parser, suppress=True)
    common = argparse.ArgumentParser(add_help=False)
    _common(common, suppress=True)
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("slack", parents=[common], help="facets and slack matrix of a 0/1 polytope")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--polytope", help="corN for the correlation polytope, N in 1..5")
    g.add_argument("--vertices", help="polytope JSON file")

    p = sub.add_parser("decompose-measurement", parents=[common], help="refine and decompose a measurement")
    p.add_argument("measurement", help="measurement JSON file")

    p = sub.add_parser("capacity", parents=[common], help="Holevo capacity search and bound")
    p.add_argument("--cone", choices=("orthant", "psd"), required=True)
    p.add_argument("--dim", type=int, required=True, help="orthant dimension or matrix side")
    p.add_argument("--real", action="store_true", help="real psd cone (default complex)")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--inputs", type=int)
    p.add_argument("--outcomes", type=int)
    p.add_argument("--canonical", action="store_true", help="evaluate the canonical construction only")

    p = sub.add_parser("simulate", parents=[common], help="run the protocol built from a factorization")
    p.add_argument("--factorization", required=True, help="factorization JSON (or factorize-cor certificate)")
    p.add_argument("--samples", type=int, default=1_000_000)

    p = sub.add_parser("factorize-cor", parents=[common], help="CP factorization of the COR(n) slack matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--threads", type=int)

    p = sub.add_parser("cp-extend", parents=[common], help="CP lift of COR(n)")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("compile-circuit", parents=[common], help="compile a netlist to a face of COR(n)")
    p.add_argument("netlist")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--cp-extend", action="store_true")

    p = sub.add_parser("verify-factorization", parents=[common], help="check a cone factorization against a matrix")
    p.add_argument("--factorization", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--matrix", help="matrix JSON file")
    g.add_argument("--polytope", help="corN: compare against its slack matrix")
    return parser


# -- helpers ----------------------------------------------------------------


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_polytope(spec):
    from .polytopes import correlation_polytope

    if not spec.lower().startswith("cor"):
        raise ValueError(f"unknown polytope {spec!r}; expected corN")
    return correlation_polytope(int(spec[3:]))


def _matrix_text(M):
    M = np.asarray(M)
    cells = [[str(v) if isinstance(v, Fraction) else f"{v:.6g}" for v in row] for row in M]
    width = max((len(c) for row in cells for c in row), default=1)
    return "\n".join(" ".join(c.rjust(width) for c in row) for row in cells)


def _text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict) and {"rows", "cols", "data"} <= set(obj):
        return "\n".join(pad + " ".join(str(v).rjust(8) for v in row) for row in obj["data"])
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}" for v in obj)
    return f"{pad}{obj}"


def _emit(args, payload, text=None):
    body = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if args.out:
        Path(args.out).write_text(body)
    if args.format == "text":
        print(text if text is not None else _text(payload))
    elif not args.out:
        sys.stdout.write(body)
    else:
        print(json.dumps({"status": payload.get("status", "ok"), "out": args.out}))


def _num(v, ex):
    return encode_scalar(v, ex)


# -- verbs ------------------------------------------------------------------


def cmd_slack(args):
    from .polytopes import ZeroOnePolytope, facet_enum, slack_matrix

    P = _parse_polytope(args.polytope) if args.polytope else ZeroOnePolytope.from_json(_load_json(args.vertices))
    H = facet_enum(P)
    S = slack_matrix(P, H)
    payload = {"polytope": P.to_json(), "hrep": H.to_json(args.exact), "slack": encode_matrix(S, args.exact)}
    _emit(args, payload, _matrix_text(S))
    return 0


def cmd_decompose(args):
    from .gpt import Measurement, decompose_measurement, refine_measurement

    M = Measurement.from_json(_load_json(args.measurement))
    system = M.system
    R, omap = refine_measurement(M, system)
    mix = decompose_measurement(R, system)
    tol = args.tol if args.tol is not None else 1e-9
    err = 0.0
    for a, b in zip(mix.recombine(), R.effects):
        err = max(err, float(np.abs(exact.to_float(a - b)).max()))
    ex = args.exact and R.is_exact
    parts = [
        {"weight": _num(w, ex), "nonzero": len(part.nonzero()), "effects": part.to_json(ex)["effects"]}
        for w, part in mix.parts
    ]
    payload = {
        "n": system.n,
        "refined": R.to_json(ex)["effects"],
        "outcome_map": omap,
        "parts": parts,
        "max_recombination_error": err,
        "max_nonzero": max(p["nonzero"] for p in parts),
    }
    if err > tol or payload["max_nonzero"] > system.n:
        raise VerificationFailure("mixture recombination or part size", payload)
    _emit(args, payload)
    return 0


def cmd_capacity(args):
    from .cones import ConeOracle
    from .gpt import GptSystem, capacity_bound, holevo_capacity_lower

    if args.cone == "orthant":
        system = GptSystem(ConeOracle.orthant(args.dim))
    else:
        system = GptSystem(ConeOracle.psd(args.dim, complex_=not args.real))
    res = holevo_capacity_lower(
        system, args.inputs, args.outcomes, restarts=args.restarts, seed=args.seed, iters=args.iters,
        canonical=args.canonical,
    )
    bound = capacity_bound(system)
    payload = {
        "cone": system.cone.to_json(),
        "n": system.n,
        "capacity_lower": round(res.value, 12),
        "bound": bound,
        "restart": res.restart,
        "prior": [round(float(p), 12) for p in res.ensemble.prior],
    }
    if res.value > bound + 1e-9:
        raise VerificationFailure("capacity exceeds log2 n", payload)
    _emit(args, payload, f"I = {res.value:.12g} bits, bound log2 n = {bound:.12g}")
    return 0


def _load_factorization(path):
    from .cones import ConeOracle
    from .protocol import ConeFactorization

    obj = _load_json(path)
    if "Y_factors" in obj:
        # certificate written by factorize-cor
        from .cones import CpCertificate

        cone = ConeOracle.from_json(obj["cone"])
        factors = [exact.exact_array([Fraction(v) if isinstance(v, str) else v for v in z]) for z in obj["Y_factors"]]
        states = [np.outer(z, z) for z in factors]
        responses = [decode_matrix(f["dual"]["M"]) for f in obj["facets"]]
        certs = [CpCertificate((z,)) for z in factors]
        return ConeFactorization(cone, states, responses, certs), decode_matrix(obj["slack"])
    return ConeFactorization.from_json(obj), None


def cmd_simulate(args):
    from .protocol import exact_expectation, protocol_from_factorization, sample

    F, _ = _load_factorization(args.factorization)
    C = F.matrix()
    P = protocol_from_factorization(F)
    E = exact_expectation(P)
    ex_err = float(np.abs(exact.to_float(E) - exact.to_float(C)).max())
    rng = np.random.default_rng(args.seed)
    N = args.samples
    means = []
    worst = 0.0
    for x in range(P.num_x):
        row = []
        for y in range(P.num_y):
            draws = sample(P, x, y, rng, size=N)
            mean = float(draws.mean())
            e = float(E[x, y])
            second = float(P.abort[x]) * sum(
                float(r) ** 2 * float(pr) for r, pr in zip(P.outputs[y], _probs(P, x, y))
            )
            se = np.sqrt(max(second - e * e, 0.0) / N)
            z = abs(mean - e) / se if se > 0 else (0.0 if mean == e else np.inf)
            worst = max(worst, z)
            row.append(mean)
        means.append(row)
    tol = args.tol if args.tol is not None else (0 if exact.is_exact(E) else 1e-5)
    payload = {
        "lam": _num(P.lam, args.exact),
        "mu": _num(P.mu, args.exact),
        "output_scale": _num(P.mu, args.exact),
        "expectation": encode_matrix(E, args.exact),
        "expectation_max_error": ex_err,
        "samples": N,
        "seed": args.seed,
        "monte_carlo_mean": encode_matrix(np.array(means), False),
        "max_standard_errors": worst,
    }
    if ex_err > tol:
        raise VerificationFailure("exact expectation does not reproduce the matrix", payload)
    if worst > 4:
        raise VerificationFailure("Monte Carlo mean outside 4 standard errors", payload)
    _emit(args, payload)
    return 0


def _probs(P, x, y):
    from .gpt import outcome_distribution

    return outcome_distribution(P.states[x], P.measurements[y])


def cmd_factorize(args):
    from .cpext import DEFAULT_TOL, factorize_cor_slack

    tol = args.tol if args.tol is not None else DEFAULT_TOL
    cert = factorize_cor_slack(args.n, tol=tol, threads=args.threads)
    payload = cert.to_json()
    gaps = [float(abs(d.objective - d.diagnostics["kappa"])) for d in cert.duals]
    payload["objective_gaps"] = gaps
    payload["status"] = "ok"
    bad = []
    if max(gaps) > tol:
        bad.append("objective gap")
    if min(float(d.simplex_min) for d in cert.duals) < -1e-8:
        bad.append("copositivity")
    if cert.max_abs_err > 1e-5 or not cert.membership_ok:
        bad.append("factorization error")
    if bad:
        payload["status"] = "fail"
        raise VerificationFailure(", ".join(bad), payload)
    _emit(args, payload)
    return 0


def cmd_cp_extend(args):
    from .cpext import cp_extension_constraints, vertex_lift
    from .polytopes import binary_vectors

    lift = cp_extension_constraints(args.n)
    checks = []
    for a in binary_vectors(args.n):
        Y, _ = vertex_lift(a)
        feasible = lift.satisfied_by(Y)
        proj = [int(v) for v in lift.project(Y)]
        expected = [a[i] * a[j] for i, j in lift.projection]
        checks.append({"a": list(a), "feasible": feasible, "projects_to_vertex": proj == expected})
    payload = lift.to_json()
    payload["vertex_checks"] = checks
    if not all(c["feasible"] and c["projects_to_vertex"] for c in checks):
        raise VerificationFailure("vertex lift infeasible or projects off the vertex", payload)
    _emit(args, payload)
    return 0


def cmd_compile(args):
    from .circuits import (
        Circuit,
        compile_circuit,
        cp_extension_of_definable,
        face_projection,
        lower_to_nor,
        parse_netlist,
        validity_audit,
        vertex_set,
    )

    c = parse_netlist(Path(args.netlist).read_text())
    if isinstance(c, Circuit):
        c = lower_to_nor(c)
    f = compile_circuit(c)
    payload = {
        "n": f.n,
        "d": f.d,
        "wire_index": f.wire_index,
        "equations": [e.text() for e in f.equations],
    }
    failed = []
    text = [f"n = {f.n}"] + [f"  {e.text()}" for e in f.equations]
    if args.verify:
        vs = [list(v) for v in vertex_set(c)]
        proj = [list(v) for v in face_projection(f)]
        audit = validity_audit(f)
        ok = vs == proj and all(a.ok for a in audit)
        payload["vertex_set"] = vs
        payload["face_projection"] = proj
        payload["audit"] = [{"equation": a.equation.text(), "max_lhs": a.max_lhs, "ok": a.ok} for a in audit]
        payload["verify"] = "PASS" if ok else "FAIL"
        text += [f"vertex set:      {vs}", f"face projection: {proj}", "PASS" if ok else "FAIL"]
        if not ok:
            failed.append("projection of the compiled face differs from the circuit's vertex set")
    if args.cp_extend:
        lift = cp_extension_of_definable(c)
        res = lift.verify()
        payload["cp_extension"] = lift.to_json()
        payload["cp_extension_check"] = {
            "feasible_lifts": [list(a) for a in res["feasible"]],
            "mismatches": [list(a) for a in res["mismatches"]],
            "projection": [list(a) for a in res["projection"]],
        }
        if res["mismatches"]:
            failed.append("lift feasibility differs from face membership")
    if failed:
        raise VerificationFailure("; ".join(failed), payload)
    if args.format == "text":
        if args.out:
            Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print("\n".join(text))
    else:
        if args.verify:
            print("PASS", file=sys.stderr)
        _emit(args, payload)
    return 0


def cmd_verify(args):
    from .polytopes import facet_enum, slack_matrix, verify_cone_factorization

    F, S = _load_factorization(args.factorization)
    if args.matrix:
        S = decode_matrix(_load_json(args.matrix))
    elif args.polytope:
        P = _parse_polytope(args.polytope)
        S = slack_matrix(P, facet_enum(P))
    elif S is None:
        S = F.matrix()
    tol = args.tol if args.tol is not None else 1e-5
    rep = verify_cone_factorization(S, F.states, F.responses, F.cone, tol=1e-8, certificates=F.certificates)
    payload = {
        "max_abs_err": rep.max_abs_err,
        "membership_ok": rep.membership_ok,
        "unknown": [list(u) for u in rep.unknown],
        "failures": [list(f) for f in rep.failures],
        "tol": tol,
    }
    if not rep.passed(tol):
        raise VerificationFailure("factorization error above tolerance or factor outside its cone", payload)
    _emit(args, payload)
    return 0


COMMANDS = {
    "slack": cmd_slack,
    "decompose-measurement": cmd_decompose,
    "capacity": cmd_capacity,
    "simulate": cmd_simulate,
    "factorize-cor": cmd_factorize,
    "cp-extend": cmd_cp_extend,
    "compile-circuit": cmd_compile,
    "verify-factorization": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k) or getattr(args, k) is None:
            setattr(args, k, v)
    try:
        return COMMANDS[args.verb](args)
    except VerificationFailure as err:
        print(json.dumps({"status": "fail", "invariant": err.invariant, "details": err.payload}, indent=2, default=str))
        return 1
    except (ValueError, ArithmeticError, OSError, KeyError, RuntimeError) as err:
        diag = {"status": "error", "error": type(err).__name__, "message": str(err)}
        if getattr(err, "diagnostics", None):
            diag["diagnostics"] = err.diagnostics
        print(json.dumps(diag, indent=2, default=str))
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
