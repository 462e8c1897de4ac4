import numpy as np
import pytest

from gensec.errors import NonFiniteEvaluation, SingularOperator
from gensec.numerics import fd_jacobian, operator_norm, solve_linear


def test_solve_identity():
    np.testing.assert_array_equal(solve_linear(np.eye(2), [3.0, -1.0]), [3.0, -1.0])


def test_solve_diagonal():
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0], rtol=0, atol=1e-15)


def test_solve_rank_one_is_singular():
    with pytest.raises(SingularOperator):
        solve_linear(np.array([[1.0, 1.0], [1.0, 1.0]]), [1.0, 0.0])


def test_solve_zero_matrix_is_singular():
    with pytest.raises(SingularOperator):
        solve_linear(np.zeros((3, 3)), np.ones(3))


def test_solve_random_well_conditioned():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = rng.integers(1, 8)
        U, _ = np.linalg.qr(rng.normal(size=(n, n)))
        V, _ = np.linalg.qr(rng.normal(size=(n, n)))
        sing = np.logspace(0, rng.uniform(0, 6), n)
        A = U @ np.diag(sing) @ V.T
        b = rng.normal(size=n)
        x = solve_linear(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * (1 + np.linalg.norm(b))


@pytest.mark.parametrize(
    "A, expected",
    [
        (np.eye(3), 1.0),
        (np.diag([3.0, -5.0]), 5.0),
        (np.array([[0.0, 2.0], [0.0, 0.0]]), 2.0),
        (np.zeros((2, 2)), 0.0),
    ],
)
def test_operator_norm_examples(A, expected):
    assert operator_norm(A) == pytest.approx(expected, rel=1e-8, abs=1e-15)


def test_operator_norm_nilpotent_against_eigen_oracle():
    A = np.array([[0.0, 2.0], [0.0, 0.0]])
    oracle = np.sqrt(np.max(np.linalg.eigvalsh(A.T @ A)))
    assert oracle == pytest.approx(2.0)
    assert operator_norm(A) == pytest.approx(oracle, rel=1e-8)


def test_operator_norm_dominates_samples():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(5, 5))
    nrm = operator_norm(A)
    for _ in range(100):
        v = rng.normal(size=5)
        v /= np.linalg.norm(v)
        assert nrm >= np.linalg.norm(A @ v) - 1e-8


def test_fd_jacobian_identity_and_constant():
    x = np.array([0.3, -1.2, 4.0])
    np.testing.assert_allclose(fd_jacobian(lambda z: z, x), np.eye(3), atol=1e-9)
    np.testing.assert_allclose(fd_jacobian(lambda z: np.array([1.0, 2.0, 3.0]), x), np.zeros((3, 3)), atol=0)


def test_fd_jacobian_quadratic():
    J = fd_jacobian(lambda z: np.array([z[0] ** 2, z[1]]), np.array([1.0, 1.0]), h=1e-6)
    np.testing.assert_allclose(J, [[2.0, 0.0], [0.0, 1.0]], atol=1e-8)


def test_fd_jacobian_affine():
    rng = np.random.default_rng(2)
    M, c = rng.normal(size=(4, 4)), rng.normal(size=4)
    J = fd_jacobian(lambda z: M @ z + c, rng.normal(size=4))
    np.testing.assert_allclose(J, M, atol=1e-8)


def test_fd_jacobian_rejects_nan():
    with pytest.raises(NonFiniteEvaluation), np.errstate(all="ignore"):
        fd_jacobian(lambda z: np.log(z - 1.0), np.array([1.0]))
