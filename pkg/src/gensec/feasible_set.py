"""Constraint sets accessed through a linear minimization oracle.

Every set can answer ``lmo`` and ``contains``; boxes and balls also have a
closed-form Euclidean projection. ``condg_project`` is the conditional
gradient routine that produces feasible inexact projections, and
``verify_inexact_projection`` checks such a point independently with a
single oracle call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from gensec.errors import MaxInnerIterations, NoAnalyticProjection, UnboundedDomain
from gensec.numerics import as_vector

# absolute slack on the CondG stop test and the certificate check
CERT_ATOL = 1e-12


@dataclass(frozen=True)
class WholeSpace:
    n: int

    @property
    def dimension(self) -> int:
        return self.n


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = as_vector(self.lower), as_vector(self.upper)
        if lo.shape != up.shape:
            raise ValueError("box bounds differ in dimension")
        if np.any(lo > up):
            raise ValueError("box requires lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dimension(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dimension(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class Simplex:
    """``{x >= 0 : sum(x) = scale}`` in R^n."""

    n: int
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("simplex scale must be positive")
        if self.n < 1:
            raise ValueError("simplex dimension must be >= 1")

    @property
    def dimension(self) -> int:
        return self.n


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] < 1:
            raise ValueError("polytope needs at least one vertex")
        object.__setattr__(self, "vertices", V)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]


FeasibleSet = WholeSpace | Box | Ball | Simplex | Polytope


@dataclass
class ProjectionCertificate:
    point: np.ndarray
    sup_inner: float
    threshold: float
    inner_iterations: int
    objective_history: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None

    @property
    def valid(self) -> bool:
        return self.sup_inner <= self.threshold + CERT_ATOL


def lmo(set_: FeasibleSet, d) -> np.ndarray:
    """Return a minimizer of ``<d, z>`` over the set (smallest-index ties)."""
    d = as_vector(d)
    if isinstance(set_, WholeSpace):
        raise UnboundedDomain("no linear minimizer over the whole space")
    if isinstance(set_, Box):
        z = np.where(d < 0, set_.upper, set_.lower)
        ties = d == 0
        # on a tie prefer the lower bound unless it is infinite
        z = np.where(ties & ~np.isfinite(set_.lower), set_.upper, z)
        if not np.all(np.isfinite(z)):
            raise UnboundedDomain("box is unbounded in the requested direction")
        return z
    if isinstance(set_, Ball):
        nd = np.linalg.norm(d)
        if nd < 1e-14:
            return set_.center.copy()
        return set_.center - set_.radius * d / nd
    if isinstance(set_, Simplex):
        z = np.zeros(set_.n)
        z[int(np.argmin(d))] = set_.scale
        return z
    if isinstance(set_, Polytope):
        return set_.vertices[int(np.argmin(set_.vertices @ d))].copy()
    raise TypeError(f"unknown set {set_!r}")


def _hull_distance(V: np.ndarray, x: np.ndarray) -> float:
    # distance from x to conv(V) via NNLS with a weighted sum-to-one row.
    # Every normalized lambda is a hull point, so each weight gives an upper
    # bound; several weights guard against NNLS returning a poor solution on
    # the badly scaled system.
    scale = 1.0 + np.max(np.abs(V)) + np.max(np.abs(x))
    best = np.inf
    for rho in (1.0, 10.0 * scale, 1e3 * scale):
        M = np.vstack([V.T, rho * np.ones(V.shape[0])])
        rhs = np.concatenate([x, [rho]])
        lam, _ = scipy.optimize.nnls(M, rhs, maxiter=50 * M.shape[1])
        total = lam.sum()
        if total > 0:
            best = min(best, float(np.linalg.norm(V.T @ (lam / total) - x)))
        if best == 0.0:
            break
    return best


def contains(set_: FeasibleSet, x, tol: float = 0.0) -> bool:
    x = as_vector(x)
    if x.size != set_.dimension:
        return False
    if isinstance(set_, WholeSpace):
        return bool(np.all(np.isfinite(x)))
    if isinstance(set_, Box):
        return bool(np.all(x >= set_.lower - tol) and np.all(x <= set_.upper + tol))
    if isinstance(set_, Ball):
        return bool(np.linalg.norm(x - set_.center) <= set_.radius + tol)
    if isinstance(set_, Simplex):
        return bool(np.all(x >= -tol) and abs(x.sum() - set_.scale) <= tol)
    if isinstance(set_, Polytope):
        return _hull_distance(set_.vertices, x) <= tol
    raise TypeError(f"unknown set {set_!r}")


def exact_project(set_: FeasibleSet, y) -> np.ndarray:
    y = as_vector(y)
    if isinstance(set_, WholeSpace):
        return y.copy()
    if isinstance(set_, Box):
        return np.clip(y, set_.lower, set_.upper)
    if isinstance(set_, Ball):
        r = y - set_.center
        nr = np.linalg.norm(r)
        if nr <= set_.radius:
            return y.copy()
        return set_.center + (set_.radius / nr) * r
    raise NoAnalyticProjection(f"no closed-form projection onto {type(set_).__name__}")


def default_condg_max_iter(theta: float) -> int:
    return 100_000 if theta == 0 else 10_000


def condg_project(
    set_: FeasibleSet,
    v,
    u,
    w0,
    theta: float,
    max_iter: int | None = None,
    keep_iterates: bool = False,
) -> ProjectionCertificate:
    """Conditional gradient search for ``w in P_C(v, u, theta)``.

    Starting from the feasible ``w0``, repeatedly call the oracle at
    ``w - v`` and take the exact line-search step toward the returned
    vertex until ``-s* <= theta * |v - u|^2``.
    """
    v, u, w = as_vector(v), as_vector(u), as_vector(w0).copy()
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    if max_iter is None:
        max_iter = default_condg_max_iter(theta)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    threshold = theta * float(np.dot(v - u, v - u))
    if contains(set_, v, 1e-12):
        return ProjectionCertificate(v.copy(), 0.0, threshold, 0, [0.0], [v.copy()] if keep_iterates else None)

    history = []
    iterates = [] if keep_iterates else None
    for ell in range(max_iter + 1):
        r = w - v
        history.append(0.5 * float(np.dot(r, r)))
        if keep_iterates:
            iterates.append(w.copy())
        z = lmo(set_, r)
        step = z - w
        s_star = float(np.dot(r, step))
        if -s_star <= threshold + CERT_ATOL:
            return ProjectionCertificate(w, -s_star, threshold, ell, history, iterates)
        if ell == max_iter:
            break
        alpha = min(1.0, -s_star / float(np.dot(step, step)))
        w = w + alpha * step
    raise MaxInnerIterations(
        f"CondG stop test not met after {max_iter} steps (gap {-s_star:.3e}, threshold {threshold:.3e})"
    )


def verify_inexact_projection(set_: FeasibleSet, w, v, u, theta: float) -> ProjectionCertificate:
    """Check ``<v - w, z - w> <= theta |v - u|^2`` for all z in the set.

    The supremum is attained at ``lmo(set, w - v)``, so one oracle call
    decides validity.
    """
    w, v, u = as_vector(w), as_vector(v), as_vector(u)
    threshold = theta * float(np.dot(v - u, v - u))
    if np.array_equal(w, v):
        return ProjectionCertificate(w.copy(), 0.0, threshold, 0)
    z = lmo(set_, w - v)
    sup_inner = float(np.dot(v - w, z - w))
    return ProjectionCertificate(w.copy(), sup_inner, threshold, 0)
