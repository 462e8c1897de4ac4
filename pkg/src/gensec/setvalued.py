"""Set-valued terms F and the partially linearized inclusion.

For a point x, a vector q and an operator A the subproblem is

    0 in q + A (y - x) + F(y),

solved per variant. When several solutions exist the one closest to x is
returned (ties broken lexicographically).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from gensec.errors import (
    DimensionTooLarge,
    SingularOperator,
    SubproblemInfeasible,
    SubproblemNoConvergence,
    SubproblemSingular,
)
from gensec.numerics import as_vector, solve_linear

ENUMERATION_MAX_DIM = 12
PRODUCT_CONE_MAX_DIM = 20
# outside the box by more than this, N_D(x) is treated as empty
DOMAIN_TOL = 1e-10
FILTER_TOL = 1e-9


@dataclass(frozen=True)
class Zero:
    """F(x) = {0}."""


@dataclass(frozen=True)
class NormalConeBox:
    """Normal cone of the box [lower, upper]; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = as_vector(self.lower), as_vector(self.upper)
        if lo.shape != up.shape:
            raise ValueError("bounds differ in dimension")
        if np.any(lo > up):
            raise ValueError("normal cone box requires lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)


@dataclass(frozen=True)
class ProductCone:
    """F = R^s_- x {0}^(n-s): inequalities v_i >= 0 for i < s, equalities after."""

    s: int

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("s must be nonnegative")


@dataclass(frozen=True)
class CustomTerm:
    """User-supplied term.

    ``solver(q, A, x)`` must return y with 0 in q + A(y - x) + F(y) and
    ``residual(x, v)`` must return d(0, v + F(x)). Both must be reentrant.
    """

    solver: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    residual: Callable[[np.ndarray, np.ndarray], float]


SetValuedTerm = Zero | NormalConeBox | ProductCone | CustomTerm


@dataclass
class InclusionSolution:
    point: np.ndarray
    residual: float
    active_set: tuple[str, ...]


def residual(term: SetValuedTerm, x, v) -> float:
    """Distance from 0 to v + F(x); +inf when x is outside dom F."""
    x, v = as_vector(x), as_vector(v)
    if isinstance(term, Zero):
        return float(np.linalg.norm(v))
    if isinstance(term, NormalConeBox):
        if np.any(x < term.lower - DOMAIN_TOL) or np.any(x > term.upper + DOMAIN_TOL):
            return float(np.inf)
        return float(np.linalg.norm(x - np.clip(x - v, term.lower, term.upper)))
    if isinstance(term, ProductCone):
        s = term.s
        if s > v.size:
            raise ValueError("product cone s exceeds the dimension")
        ineq = np.maximum(0.0, -v[:s])
        return float(np.sqrt(np.dot(ineq, ineq) + np.dot(v[s:], v[s:])))
    if isinstance(term, CustomTerm):
        return float(term.residual(x, v))
    raise TypeError(f"unknown term {term!r}")


def _finish(term, q, A, x, y, labels) -> InclusionSolution:
    res = residual(term, y, q + A @ (y - x))
    return InclusionSolution(y, res, tuple(labels))


def _order_key(x):
    def key(sol: InclusionSolution):
        return (float(np.linalg.norm(sol.point - x)), tuple(sol.point))

    return key


def _dedupe(solutions, x):
    solutions = sorted(solutions, key=_order_key(x))
    kept = []
    for sol in solutions:
        if all(np.linalg.norm(sol.point - k.point) > FILTER_TOL for k in kept):
            kept.append(sol)
    return kept


def _box_pattern_solve(term: NormalConeBox, q, A, x, pattern):
    n = x.size
    y = np.empty(n)
    free = np.array([p == "free" for p in pattern])
    for i, p in enumerate(pattern):
        if p == "lower":
            y[i] = term.lower[i]
        elif p == "upper":
            y[i] = term.upper[i]
    fixed = ~free
    if free.any():
        # w_F = q_F + A_FF (y_F - x_F) + A_FB (y_B - x_B) = 0
        rhs = -(q[free] + A[np.ix_(free, fixed)] @ (y[fixed] - x[fixed]))
        y[free] = x[free] + solve_linear(A[np.ix_(free, free)], rhs)
    return y


def _box_pattern_feasible(term: NormalConeBox, q, A, x, y, pattern, tol) -> bool:
    w = q + A @ (y - x)
    for i, p in enumerate(pattern):
        if p == "free":
            if y[i] < term.lower[i] - tol or y[i] > term.upper[i] + tol or abs(w[i]) > tol:
                return False
        elif p == "lower" and w[i] < -tol:
            return False
        elif p == "upper" and w[i] > tol:
            return False
    return True


def _box_patterns(term: NormalConeBox, n):
    choices = []
    for i in range(n):
        opts = ["free"]
        if np.isfinite(term.lower[i]):
            opts.append("lower")
        if np.isfinite(term.upper[i]) and term.upper[i] != term.lower[i]:
            opts.append("upper")
        choices.append(opts)
    return itertools.product(*choices)


def _enumerate_box(term, q, A, x):
    tol = FILTER_TOL * (1.0 + np.linalg.norm(q))
    found, singular, total = [], 0, 0
    for pattern in _box_patterns(term, x.size):
        total += 1
        try:
            y = _box_pattern_solve(term, q, A, x, pattern)
        except SingularOperator:
            singular += 1
            continue
        if _box_pattern_feasible(term, q, A, x, y, pattern, tol):
            y = np.clip(y, term.lower, term.upper)
            found.append(_finish(term, q, A, x, y, pattern))
    if not found:
        if singular == total:
            raise SubproblemSingular("every active-set system is singular")
        raise SubproblemInfeasible("no active-set pattern yields a solution")
    return _dedupe(found, x)


def _enumerate_product_cone(term: ProductCone, q, A, x):
    n = x.size
    s = term.s
    if s > n:
        raise ValueError("product cone s exceeds the dimension")
    tol = FILTER_TOL * (1.0 + np.linalg.norm(q))
    found, singular, total = [], 0, 0
    for mask in itertools.product((False, True), repeat=s):
        total += 1
        rows = np.array(list(mask) + [True] * (n - s), dtype=bool)
        if rows.any():
            # least-norm step for the active rows; its KKT point is the
            # least-change solution whenever this pattern is optimal
            A_r, q_r = A[rows], q[rows]
            d, _, rank, _ = np.linalg.lstsq(A_r, -q_r, rcond=None)
            if np.linalg.norm(A_r @ d + q_r) > tol:
                singular += 1
                continue
        else:
            d = np.zeros(n)
        w = q + A @ d
        if np.all(w[:s] >= -tol):
            labels = ["active" if m else "inactive" for m in mask] + ["equality"] * (n - s)
            found.append(_finish(term, q, A, x, x + d, labels))
    if not found:
        if singular == total:
            raise SubproblemSingular("every active-set system is inconsistent")
        raise SubproblemInfeasible("no sign pattern yields a feasible point")
    return _dedupe(found, x)


def brute_force_inclusion(term: SetValuedTerm, q, A, x) -> list[InclusionSolution]:
    """All solutions found by active-set enumeration, closest to x first."""
    q, x = as_vector(q), as_vector(x)
    A = np.asarray(A, dtype=float)
    if x.size > ENUMERATION_MAX_DIM:
        raise DimensionTooLarge(f"enumeration limited to n <= {ENUMERATION_MAX_DIM}")
    if isinstance(term, Zero):
        try:
            y = x + solve_linear(A, -q)
        except SingularOperator as exc:
            raise SubproblemSingular(str(exc)) from exc
        return [_finish(term, q, A, x, y, ["free"] * x.size)]
    if isinstance(term, NormalConeBox):
        return _enumerate_box(term, q, A, x)
    if isinstance(term, ProductCone):
        return _enumerate_product_cone(term, q, A, x)
    raise TypeError(f"no enumeration oracle for {type(term).__name__}")


def _box_labels(term: NormalConeBox, t):
    return tuple("lower" if ti <= lo else "upper" if ti >= up else "free" for ti, lo, up in zip(t, term.lower, term.upper))


def _semismooth_newton_box(term: NormalConeBox, q, A, x, max_steps=200):
    """Active-set semismooth Newton on r(y) = y - clip(y - w(y), lower, upper).

    r is piecewise linear, so once the pattern used for a Newton step is
    reproduced at the new point that point solves the inclusion exactly.
    """
    n = x.size
    y = np.clip(x, term.lower, term.upper)
    tol = FILTER_TOL * (1.0 + np.linalg.norm(q))
    eye = np.eye(n)
    previous = None
    for _ in range(max_steps):
        t = y - (q + A @ (y - x))
        r = y - np.clip(t, term.lower, term.upper)
        labels = _box_labels(term, t)
        if labels == previous or not np.any(r):
            break
        clamped = np.array([lab != "free" for lab in labels])
        J = np.where(clamped[:, None], eye, A)
        try:
            y = y - solve_linear(J, r)
        except SingularOperator:
            return None
        previous = labels
    else:
        return None
    y = np.clip(y, term.lower, term.upper)
    sol = _finish(term, q, A, x, y, labels)
    return sol if sol.residual <= tol else None


def _uniquely_solvable(A) -> bool:
    # positive definite symmetric part => strongly monotone => unique solution
    sym = 0.5 * (A + A.T)
    return bool(np.min(np.linalg.eigvalsh(sym)) > 0)


def solve_linearized_inclusion(term: SetValuedTerm, q, A, x) -> InclusionSolution:
    """Solve 0 in q + A(y - x) + F(y) for y."""
    q, x = as_vector(q), as_vector(x)
    A = np.asarray(A, dtype=float)
    n = x.size
    if A.shape != (n, n) or q.size != n:
        raise ValueError(f"shape mismatch: A {A.shape}, q {q.shape}, x {x.shape}")
    if isinstance(term, Zero):
        return brute_force_inclusion(term, q, A, x)[0]
    if isinstance(term, NormalConeBox):
        if _uniquely_solvable(A) or n > ENUMERATION_MAX_DIM:
            sol = _semismooth_newton_box(term, q, A, x)
            if sol is not None:
                return sol
            if n > ENUMERATION_MAX_DIM:
                raise SubproblemNoConvergence("semismooth Newton stalled and n is too large to enumerate")
        return _enumerate_box(term, q, A, x)[0]
    if isinstance(term, ProductCone):
        if n > PRODUCT_CONE_MAX_DIM:
            raise DimensionTooLarge(f"product cone enumeration limited to n <= {PRODUCT_CONE_MAX_DIM}")
        return _enumerate_product_cone(term, q, A, x)[0]
    if isinstance(term, CustomTerm):
        y = as_vector(term.solver(q, A, x))
        return _finish(term, q, A, x, y, ["custom"] * n)
    raise TypeError(f"unknown term {term!r}")
