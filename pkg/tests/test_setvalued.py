import numpy as np
import pytest

from gensec import setvalued as sv
from gensec.errors import DimensionTooLarge, SubproblemInfeasible, SubproblemSingular

M = np.array([[2.0, 1.0], [1.0, 2.0]])
ORTHANT2 = sv.NormalConeBox(np.zeros(2), np.full(2, np.inf))


def test_residual_examples():
    assert sv.residual(sv.Zero(), [1.0, 2.0], [0.0, 0.0]) == 0.0
    x = np.array([1 / 3, 1 / 3])
    assert sv.residual(ORTHANT2, x, M @ x - 1.0) == pytest.approx(0.0, abs=1e-15)
    assert sv.residual(sv.ProductCone(1), [0.0, 0.0], [-0.5, 0.2]) == pytest.approx(np.sqrt(0.29))


def test_residual_outside_box_domain_is_infinite():
    assert sv.residual(ORTHANT2, [-0.1, 0.0], [0.0, 0.0]) == np.inf


def test_zero_variant_solves_linear_system():
    sol = sv.solve_linearized_inclusion(sv.Zero(), [1.0, -2.0], np.eye(2), [0.0, 0.0])
    np.testing.assert_allclose(sol.point, [-1.0, 2.0])
    rng = np.random.default_rng(6)
    A, q, x = rng.normal(size=(4, 4)) + 4 * np.eye(4), rng.normal(size=4), rng.normal(size=4)
    sol = sv.solve_linearized_inclusion(sv.Zero(), q, A, x)
    np.testing.assert_allclose(sol.point, x - np.linalg.solve(A, q), atol=1e-12)
    (bf,) = sv.brute_force_inclusion(sv.Zero(), q, A, x)
    np.testing.assert_allclose(bf.point, sol.point, atol=1e-14)


def test_lcp_example():
    sol = sv.solve_linearized_inclusion(ORTHANT2, [-1.0, -1.0], M, [0.0, 0.0])
    np.testing.assert_allclose(sol.point, [1 / 3, 1 / 3], atol=1e-14)
    assert sol.active_set == ("free", "free")
    found = sv.brute_force_inclusion(ORTHANT2, [-1.0, -1.0], M, [0.0, 0.0])
    assert len(found) == 1
    np.testing.assert_allclose(found[0].point, [1 / 3, 1 / 3], atol=1e-14)


def test_corner_solution():
    found = sv.brute_force_inclusion(ORTHANT2, [1.0, 1.0], np.eye(2), [0.0, 0.0])
    np.testing.assert_allclose(found[0].point, [0.0, 0.0])
    sol = sv.solve_linearized_inclusion(ORTHANT2, [1.0, 1.0], np.eye(2), [0.0, 0.0])
    np.testing.assert_allclose(sol.point, [0.0, 0.0])
    assert sol.active_set == ("lower", "lower")


def test_product_cone_one_dimensional():
    sol = sv.solve_linearized_inclusion(sv.ProductCone(1), [0.7], np.eye(1), [0.0])
    np.testing.assert_allclose(sol.point, [0.0])


def _qp_oracle(s, q, A, x):
    # least-change: min |d|^2 s.t. (q + A d)_i >= 0 (i < s), (q + A d)_i = 0 (i >= s)
    cp = pytest.importorskip("cvxpy")
    d = cp.Variable(x.size)
    w = q + A @ d
    cons = []
    if s:
        cons.append(w[:s] >= 0)
    if s < x.size:
        cons.append(w[s:] == 0)
    cp.Problem(cp.Minimize(cp.sum_squares(d)), cons).solve()
    return x + d.value


def test_product_cone_matches_qp_oracle():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 6))
        s = int(rng.integers(0, n + 1))
        A = rng.normal(size=(n, n)) + 3 * np.eye(n)
        q, x = rng.normal(size=n), rng.normal(size=n)
        sol = sv.solve_linearized_inclusion(sv.ProductCone(s), q, A, x)
        assert sol.residual <= 1e-9 * (1 + np.linalg.norm(q))
        np.testing.assert_allclose(sol.point, _qp_oracle(s, q, A, x), atol=1e-6)


def test_product_cone_least_change_selection():
    # 0 in q + (y - x) + R_- x {0}: y1 >= x1 - q1 and y2 = x2 - q2
    sols = sv.brute_force_inclusion(sv.ProductCone(1), [-1.0, 0.5], np.eye(2), [0.0, 0.0])
    np.testing.assert_allclose(sols[0].point, [1.0, -0.5])
    assert [np.linalg.norm(s.point) for s in sols] == sorted(np.linalg.norm(s.point) for s in sols)


def test_box_nonunique_picks_closest():
    # A = 0 on a [0,1] box with q = 0: every y in [0,1] solves; candidates are vertices
    term = sv.NormalConeBox(np.zeros(1), np.ones(1))
    found = sv.brute_force_inclusion(term, [0.0], np.zeros((1, 1)), [0.8])
    np.testing.assert_allclose(found[0].point, [1.0])
    sol = sv.solve_linearized_inclusion(term, [0.0], np.zeros((1, 1)), [0.8])
    np.testing.assert_allclose(sol.point, [1.0])


def test_box_infeasible_raises():
    # q + A(y - x) = 1 > 0 everywhere, but the box has no lower bound to stop at
    term = sv.NormalConeBox(np.full(1, -np.inf), np.full(1, np.inf))
    with pytest.raises((SubproblemInfeasible, SubproblemSingular)):
        sv.solve_linearized_inclusion(term, [1.0], np.zeros((1, 1)), [0.0])


def test_product_cone_inconsistent_is_singular():
    with pytest.raises(SubproblemSingular):
        sv.solve_linearized_inclusion(sv.ProductCone(0), [1.0, 0.0], np.zeros((2, 2)), [0.0, 0.0])


def test_enumeration_dimension_guard():
    n = 13
    with pytest.raises(DimensionTooLarge):
        sv.brute_force_inclusion(sv.NormalConeBox(np.zeros(n), np.ones(n)), np.zeros(n), np.eye(n), np.zeros(n))


def test_large_box_uses_semismooth_newton():
    rng = np.random.default_rng(8)
    n = 30
    G = rng.normal(size=(n, n))
    A = G.T @ G / n + np.eye(n)
    term = sv.NormalConeBox(-np.ones(n), np.ones(n))
    sol = sv.solve_linearized_inclusion(term, rng.normal(size=n) * 2, A, np.zeros(n))
    assert sol.residual <= 1e-9


def test_custom_term_hook():
    term = sv.CustomTerm(
        solver=lambda q, A, x: x + np.linalg.solve(A, -q),
        residual=lambda x, v: float(np.linalg.norm(v)),
    )
    sol = sv.solve_linearized_inclusion(term, [2.0], np.array([[4.0]]), [1.0])
    np.testing.assert_allclose(sol.point, [0.5])
    assert sol.residual == 0.0
