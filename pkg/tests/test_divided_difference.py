import numpy as np
import pytest

from gensec import maps
from gensec.divided_difference import first_order_dd, second_order_dd_bound, secant_residual
from gensec.errors import DegeneratePoints, NonFiniteEvaluation


def test_abs_symmetric_points():
    dd = first_order_dd(np.abs, [-1.0], [1.0])
    np.testing.assert_array_equal(dd.operator, [[0.0]])
    assert secant_residual(dd, np.abs) <= 1e-12


def test_affine_recovers_matrix():
    rng = np.random.default_rng(3)
    M, c = rng.normal(size=(3, 3)), rng.normal(size=3)
    g = maps.Affine(M, c)
    dd = first_order_dd(g, rng.normal(size=3), rng.normal(size=3))
    np.testing.assert_allclose(dd.operator, M, atol=1e-12)
    assert secant_residual(dd, g) <= 1e-12


def test_mixed_point_example_by_hand():
    # g(x) = (x1^2, x1 x2), x = (0,0), y = (1,1); mixed points p0=(0,0), p1=(1,0), p2=(1,1)
    # column 1 = g(1,0) - g(0,0) = (1, 0); column 2 = g(1,1) - g(1,0) = (0, 1)
    g = maps.square_coupled
    dd = first_order_dd(g, [0.0, 0.0], [1.0, 1.0])
    np.testing.assert_allclose(dd.operator, [[1.0, 0.0], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(dd.operator @ [1.0, 1.0], g(np.ones(2)) - g(np.zeros(2)))
    assert secant_residual(dd, g) <= 1e-10


def test_coincident_coordinate_uses_partial():
    dd = first_order_dd(maps.square_coupled, [1.0, 2.0], [1.0, 3.0])
    assert dd.coincidence_flags == (True, False)
    # d g / d x1 at (1, 2) is (2, 2)
    np.testing.assert_allclose(dd.operator[:, 0], [2.0, 2.0], atol=1e-8)


def test_equal_points_give_jacobian():
    x = np.array([0.7, -0.4, 1.1])
    dd = first_order_dd(maps.square_coupled, x, x)
    assert all(dd.coincidence_flags)
    np.testing.assert_allclose(dd.operator, maps.square_coupled_jacobian(x), atol=1e-8)


def test_not_assumed_symmetric():
    g = maps.square_coupled
    x, y = np.array([0.5, -1.0]), np.array([1.5, 2.0])
    fwd, bwd = first_order_dd(g, x, y), first_order_dd(g, y, x)
    assert not np.allclose(fwd.operator, bwd.operator)
    assert secant_residual(fwd, g) <= 1e-12
    assert secant_residual(bwd, g) <= 1e-12


def test_nonfinite_probe_raises():
    with pytest.raises(NonFiniteEvaluation), np.errstate(divide="ignore"):
        first_order_dd(lambda z: 1.0 / z, [0.0], [1.0])


def test_second_order_affine_is_zero():
    rng = np.random.default_rng(4)
    g = maps.Affine(rng.normal(size=(3, 3)), rng.normal(size=3))
    pts = rng.normal(size=(3, 3))
    assert second_order_dd_bound(g, *pts) <= 1e-10


def test_second_order_scalar_square():
    # [1,2;g] = 3, [0,1;g] = 1, |3 - 1| / |2 - 0| = 1 = g''/2
    val = second_order_dd_bound(lambda x: x**2, [0.0], [1.0], [2.0])
    assert val == pytest.approx(1.0, abs=1e-12)


def test_second_order_degenerate():
    with pytest.raises(DegeneratePoints):
        second_order_dd_bound(np.abs, [1.0], [2.0], [1.0 + 1e-14])
