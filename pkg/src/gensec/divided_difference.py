"""First- and second-order divided differences of vector-valued maps.

The operator ``[x, y; g]`` is only pinned down by its action on ``y - x``;
we realise it with the coordinatewise mixed-point construction

    column j = (g(p_j) - g(p_{j-1})) / (y_j - x_j),
    p_j = (y_1, ..., y_j, x_{j+1}, ..., x_n),

which telescopes to ``g(y) - g(x)`` exactly and tends to the Jacobian as
``y -> x`` when g is smooth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gensec.errors import DegeneratePoints
from gensec.numerics import VectorMap, as_vector, evaluate, operator_norm

COINCIDENCE_RTOL = 1e-12
FD_STEP_RTOL = 1e-6


@dataclass(frozen=True)
class DividedDifference:
    operator: np.ndarray
    left: np.ndarray
    right: np.ndarray
    coincidence_flags: tuple[bool, ...]

    @property
    def any_coincident(self) -> bool:
        return any(self.coincidence_flags)


def first_order_dd(g: VectorMap, x, y) -> DividedDifference:
    x = as_vector(x)
    y = as_vector(y)
    n = x.size
    if y.size != n:
        raise ValueError("x and y must have the same dimension")
    p_prev = x.copy()
    g_prev = evaluate(g, p_prev)
    cols = []
    flags = []
    for j in range(n):
        p = p_prev.copy()
        p[j] = y[j]
        g_p = evaluate(g, p)
        delta = y[j] - x[j]
        if abs(delta) < COINCIDENCE_RTOL * (1.0 + abs(x[j])):
            # [x, x; g] = g'(x): central-difference partial at the mixed point
            h = FD_STEP_RTOL * (1.0 + abs(x[j]))
            plus = p_prev.copy()
            minus = p_prev.copy()
            plus[j] += h
            minus[j] -= h
            cols.append((evaluate(g, plus) - evaluate(g, minus)) / (2.0 * h))
            flags.append(True)
        else:
            cols.append((g_p - g_prev) / delta)
            flags.append(False)
        p_prev, g_prev = p, g_p
    operator = np.column_stack(cols) if cols else np.zeros((0, 0))
    return DividedDifference(operator, x, y, tuple(flags))


def secant_residual(dd: DividedDifference, g: VectorMap) -> float:
    """Norm of ``[x, y; g](y - x) - (g(y) - g(x))``."""
    lhs = dd.operator @ (dd.right - dd.left)
    rhs = evaluate(g, dd.right) - evaluate(g, dd.left)
    return float(np.linalg.norm(lhs - rhs))


def second_order_dd_bound(g: VectorMap, x, y, z) -> float:
    """Empirical lower estimate of the norm of ``[x, y, z; g]``.

    Uses ``[x, y, z; g](z - x) = [y, z; g] - [x, y; g]`` and returns
    ``|[y, z; g] - [x, y; g]| / |z - x|``.
    """
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    gap = np.linalg.norm(z - x)
    if gap <= 1e-12:
        raise DegeneratePoints(f"|z - x| = {gap:g} too small")
    upper = first_order_dd(g, y, z).operator
    lower = first_order_dd(g, x, y).operator
    return operator_norm(upper - lower) / gap
