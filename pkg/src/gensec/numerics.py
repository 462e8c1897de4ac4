"""Dense linear algebra helpers used throughout the solver."""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
import scipy.linalg

from gensec.errors import NonFiniteEvaluation, SingularOperator

PIVOT_RTOL = 1e-12

VectorMap = Callable[[np.ndarray], np.ndarray]


def as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def evaluate(func: VectorMap, x: np.ndarray) -> np.ndarray:
    """Evaluate ``func`` at ``x`` and reject NaN/Inf output."""
    out = as_vector(func(x))
    if not np.all(np.isfinite(out)):
        raise NonFiniteEvaluation(f"non-finite value {out} at x={x}")
    return out


def solve_linear(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises SingularOperator when a pivot falls below ``1e-12 * max|A|``.
    """
    A = np.asarray(A, dtype=float)
    b = as_vector(b)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularOperator("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_RTOL * scale:
        raise SingularOperator("rank-deficient operator (pivot below threshold)")
    return scipy.linalg.lu_solve((lu, piv), b)


def operator_norm(A: np.ndarray) -> float:
    """Spectral norm sup{|Ax| : |x| <= 1}."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def fd_jacobian(func: VectorMap, x, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian, column j from x +- h e_j."""
    x = as_vector(x)
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
    if h <= 0:
        raise ValueError("step h must be positive")
    n = x.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        cols.append((evaluate(func, x + e) - evaluate(func, x - e)) / (2.0 * h))
    return np.column_stack(cols)
