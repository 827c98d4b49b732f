from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conekit import exact
from conekit.cones import ConeOracle, contains, simplex_min_quadratic
from conekit.cpext import (
    DualSolution,
    FacetInequality,
    build_primal,
    cp_extension_constraints,
    dual_box,
    dual_matrix,
    factorize_cor_slack,
    interior_dual_point,
    kappa,
    penalty_dual,
    solve_dual,
    vertex_lift,
)
from conekit.polytopes import binary_vectors

from conftest import FACET_Q


def qform(Q, a):
    return sum(Q[i, j] * a[i] * a[j] for i in range(len(a)) for j in range(len(a)))


def rational_matrices(n_max=3, lo=-4, hi=4):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(
            st.fractions(min_value=lo, max_value=hi, max_denominator=4), min_size=n * n, max_size=n * n
        ).map(lambda v: exact.exact_array(np.array(v, dtype=object).reshape(n, n)))
    )


# -- primal -----------------------------------------------------------------


def test_primal_sizes():
    for n in (1, 2, 3):
        P = build_primal(exact.zeros((n, n)))
        assert P.m == 1 + 2 * n
        assert len(P.constraints) == 1 + 3 * n
        for _, A, _ in P.constraints:
            assert (A == A.T).all()


def test_eq_two_pattern():
    P = build_primal(exact.zeros((2, 2)))
    name, A, rhs = P.constraints[1]
    assert name == "two_1" and rhs == 2
    support = {(i, j) for i in range(5) for j in range(5) if A[i, j]}
    assert support == {(0, 1), (1, 0), (0, 3), (3, 0)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_vertex_lifts_feasible(n):
    P = build_primal(exact.zeros((n, n)))
    for a in binary_vectors(n):
        Y, cert = vertex_lift(a)
        assert P.is_feasible(Y)
        assert contains(ConeOracle.completely_positive(P.m), Y, certificate=cert).is_member


def test_vertex_lift_examples():
    Y, cert = vertex_lift((1, 0))
    assert list(cert.factors[0]) == [1, 1, 0, 0, 1]
    ones = {(i, j) for i in range(5) for j in range(5) if Y[i, j] == 1}
    assert ones == {(i, j) for i in (0, 1, 4) for j in (0, 1, 4)}
    Y0, c0 = vertex_lift((0, 0, 0))
    assert list(c0.factors[0]) == [1, 0, 0, 0, 1, 1, 1]
    Y, _ = vertex_lift((1, 0, 1))
    assert [Y[i, i] for i in range(7)] == [1, 1, 0, 1, 0, 1, 0]
    with pytest.raises(ValueError):
        vertex_lift((2,))


def test_symmetrized_input():
    P = build_primal(exact.exact_array([[0, 1], [0, 0]]))
    assert P.objective[1, 2] == P.objective[2, 1] == F(1, 2)


# -- kappa ------------------------------------------------------------------


def test_kappa_examples(facet_q):
    assert kappa(facet_q) == (-1, (1, 0))
    assert kappa(exact.zeros((3, 3)))[0] == 0
    assert kappa(exact.identity(3)) == (0, (0, 0, 0))


def test_facet_from_row():
    f = FacetInequality.from_row([-1, -1, 1], -1, 2)
    assert (f.Q == FACET_Q).all() and f.kappa == -1
    assert [f.slack(a) for a in binary_vectors(2)] == [1, 0, 0, 0]


# -- dual -------------------------------------------------------------------


def test_dual_matrix_blocks():
    Q = exact.exact_array([[1, 2], [2, 3]])
    M = dual_matrix(Q, F(-1), [F(2), F(3)], [F(-4), F(-5)], [F(6), F(7)])
    assert M[0, 0] == 1
    assert M[0, 1] == -2 - 6 and M[0, 3] == -2
    assert M[1, 1] == 1 + 4 + 12 and M[3, 3] == 4 and M[1, 3] == 4
    assert M[1, 2] == 2
    assert (M == M.T).all()


@settings(max_examples=40, deadline=None)
@given(rational_matrices(), st.data())
def test_feasibility_identity(Q, data):
    n = Q.shape[0]
    Q = (Q + Q.T) / 2
    fr = st.fractions(min_value=-10, max_value=10, max_denominator=7)
    v = [data.draw(fr) for _ in range(1 + 3 * n)]
    sol = DualSolution(Q, v[0], v[1 : 1 + n], v[1 + n : 1 + 2 * n], v[1 + 2 * n :])
    M = sol.M
    for a in binary_vectors(n):
        Y, _ = vertex_lift(a)
        assert (Y * M).sum() == qform(Q, a) - sol.objective


def test_interior_point_examples(facet_q):
    sol = interior_dual_point(facet_q)
    assert sol.alpha == -4
    assert simplex_min_quadratic(sol.M).value >= F(4, 10)
    z = interior_dual_point(exact.zeros((2, 2)))
    assert z.alpha == -1
    assert simplex_min_quadratic(z.M).value >= F(1, 10)
    psd = interior_dual_point(exact.exact_array([[2, 1], [1, 2]]))
    assert psd.alpha == -1


@settings(max_examples=30, deadline=None)
@given(rational_matrices())
def test_interior_point_strictly_copositive(Q):
    sol = interior_dual_point(Q)
    m = 1 + 2 * Q.shape[0]
    assert simplex_min_quadratic(sol.M).value >= -sol.alpha / (2 * m)


def test_dual_box_bounds():
    Q = exact.exact_array([[3, 0], [0, 5]])
    box = dual_box(Q, -2)
    assert box.bounds[0] == (-4, 0)
    assert [2 * lo for lo, _ in box.bounds[1:3]] == [-6, -6]
    assert [2 * hi for _, hi in box.bounds[1:3]] == [14, 14]
    assert box.bounds[3:5] == ((-20, 0), (-20, 0))
    assert [(2 * lo, 2 * hi) for lo, hi in box.bounds[5:]] == [(-23, 39), (-25, 41)]


def test_dual_box_rejects_b_at_kappa(facet_q):
    with pytest.raises(ValueError):
        dual_box(facet_q, -1)


def test_interior_point_inside_box(facet_q):
    sol = interior_dual_point(facet_q)
    assert dual_box(facet_q, sol.alpha - 1).contains(sol)


def test_solve_dual_zero_objective():
    Q = exact.zeros((2, 2))
    sol = solve_dual(Q)
    assert sol.objective == 0
    assert sol.simplex_min >= -1e-8
    for a in binary_vectors(2):
        assert (vertex_lift(a)[0] * sol.M).sum() == 0


def test_solve_dual_facet(facet_q):
    sol = solve_dual(facet_q)
    assert abs(sol.objective - (-1)) <= 1e-6
    assert sol.simplex_min >= -1e-8
    assert sol.M[0, 0] >= 0
    assert all(sol.M[k, k] >= 0 for k in range(3, 5))


def test_box_gap_is_certified(facet_q):
    # the box with B = kappa - 1 holds no tol-optimal copositive point for this facet
    sol = solve_dual(facet_q)
    diag = sol.diagnostics
    assert diag["box_status"] == "gap"
    assert diag["box_bound"] < diag["kappa"] - F(1, 100)
    assert sol.method == "penalty"


def test_cut_solution_lies_in_box():
    Q = exact.exact_array([[0, F(1, 2)], [F(1, 2), 0]])  # facet z12 >= 0
    sol = solve_dual(Q)
    assert sol.method == "cutting_plane"
    assert dual_box(Q, kappa(Q)[0] - 1).contains(sol)
    assert sol.objective == 0


def test_penalty_dual_objective(facet_q):
    eps = F(1, 1000)
    sol = penalty_dual(facet_q, F(-1), eps, 8)
    assert sol.objective == -1 - eps


@pytest.mark.parametrize("n", [1, 2])
def test_factorize_small(n):
    cert = factorize_cor_slack(n)
    assert cert.membership_ok
    assert cert.max_abs_err <= 1e-5
    for f, d in zip(cert.facets, cert.duals):
        assert abs(d.objective - f.kappa) <= 1e-6
        assert d.simplex_min >= -1e-8
        # weak duality
        assert d.objective <= f.kappa + F(1, 10**6)
    for i, (Y, _) in enumerate(cert.lifts):
        for j, M in enumerate(cert.U):
            assert abs(float((Y * M).sum() - cert.slack[i, j])) <= 1e-5


def test_factorize_n1_slack():
    cert = factorize_cor_slack(1)
    assert sorted(map(tuple, cert.slack.tolist())) == [(0, 1), (1, 0)]


def test_certificate_json(cor2_cert):
    obj = cor2_cert.to_json()
    assert len(obj["Y_factors"]) == 4 and len(obj["facets"]) == 4
    assert obj["cone"] == {"kind": "completely_positive", "ambient": 5}
    assert obj["max_abs_err"] <= 1e-5


def test_factorize_rejects_large_n():
    with pytest.raises(ValueError):
        factorize_cor_slack(4)


def test_cp_extension_constraints():
    lift = cp_extension_constraints(2)
    assert len(lift.constraints) == 7
    assert lift.projection == {(0, 0): (1, 1), (1, 1): (2, 2), (0, 1): (1, 2)}
    assert lift.proper is False
    for a in binary_vectors(2):
        Y, _ = vertex_lift(a)
        assert lift.satisfied_by(Y)
        assert lift.project(Y) == (a[0], a[1], a[0] * a[1])
