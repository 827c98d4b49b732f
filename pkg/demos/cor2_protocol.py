"""Slack matrix of COR(2), a completely positive factorization of it, and the
communication protocol that factorization induces.

Run with ``python3 demos/cor2_protocol.py``.
"""

import numpy as np

from conekit import exact
from conekit.cones import ConeOracle
from conekit.cpext import factorize_cor_slack
from conekit.polytopes import correlation_polytope, facet_enum, slack_matrix, trivial_factorization
from conekit.protocol import ConeFactorization, exact_expectation, protocol_from_factorization, sample

P = correlation_polytope(2)
H = facet_enum(P)
S = slack_matrix(P, H)
print("facets (a . z >= b):")
for a, b in zip(H.A, H.b):
    print("  ", [str(v) for v in a], ">=", b)
print("slack matrix:")
print(exact.to_float(S))

cert = factorize_cor_slack(2)
print("\ndual objective gaps:", [float(abs(d.objective - f.kappa)) for f, d in zip(cert.facets, cert.duals)])
print("dual methods:", [d.method for d in cert.duals])

F = ConeFactorization(ConeOracle.completely_positive(5), cert.T, cert.U, [c for _, c in cert.lifts])
proto = protocol_from_factorization(F)
E = exact.to_float(exact_expectation(proto))
print("\nprotocol output scale mu =", float(proto.mu))
print("max |E - S| =", np.abs(E - exact.to_float(S)).max())

# the penalty duals make mu large, so sampling that protocol is very noisy;
# the trivial orthant factorization gives a small-variance protocol instead
T, U, K = trivial_factorization(S)
simple = protocol_from_factorization(ConeFactorization(K, T, U))
rng = np.random.default_rng(3)
for x in range(simple.num_x):
    y = int(np.argmax(exact.to_float(S[x])))
    draws = sample(simple, x, y, rng, size=100_000)
    print(f"cell ({x},{y}): sample mean {draws.mean():.4f}, exact {float(S[x, y])}, mu={float(simple.mu)}")
