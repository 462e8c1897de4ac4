"""Inexact Broyden secant-type iteration for 0 in f(x) + g(x) + F(x), x in C.

Each outer step linearizes f with the Broyden operator B_k and g with the
divided difference [x_{k-1}, x_k; g], solves the resulting inclusion for
y_k, updates B_k with the secant pair built from y_k, and restores
feasibility with CondG when y_k leaves C.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from gensec import feasible_set as fs
from gensec import setvalued as sv
from gensec.divided_difference import first_order_dd
from gensec.errors import (
    InfeasibleStart,
    InsufficientTrace,
    MaxInnerIterations,
    MissingGroundTruth,
    MissingJacobian,
    SubproblemError,
    ZeroStep,
)
from gensec.numerics import VectorMap, as_vector, evaluate, fd_jacobian, operator_norm

log = logging.getLogger(__name__)

FEAS_TOL = 1e-10


def zero_map(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ProblemSpec:
    dimension: int
    f: VectorMap
    g: VectorMap = zero_map
    term: sv.SetValuedTerm = field(default_factory=sv.Zero)
    set: fs.FeasibleSet | None = None
    analytic_jacobian_f: Callable[[np.ndarray], np.ndarray] | None = None
    known_solution: np.ndarray | None = None
    lipschitz_L: float | None = None
    dd_bound_M: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.set is None:
            object.__setattr__(self, "set", fs.WholeSpace(self.dimension))
        if self.set.dimension != self.dimension:
            raise ValueError("feasible set dimension does not match the problem")
        if self.known_solution is not None:
            x_star = as_vector(self.known_solution)
            object.__setattr__(self, "known_solution", x_star)
            if x_star.size != self.dimension:
                raise ValueError("known_solution has the wrong dimension")
            if self.residual(x_star) > 1e-8:
                raise ValueError(f"known_solution has residual {self.residual(x_star):.3e} > 1e-8")
            if not fs.contains(self.set, x_star, FEAS_TOL):
                raise ValueError("known_solution lies outside the feasible set")

    def value(self, x: np.ndarray) -> np.ndarray:
        return evaluate(self.f, x) + evaluate(self.g, x)

    def residual(self, x) -> float:
        x = as_vector(x)
        return sv.residual(self.term, x, self.value(x))


@dataclass(frozen=True)
class SolverConfig:
    theta: float | Sequence[float] = 0.25
    b0_mode: str | np.ndarray = "fd_jacobian"
    tol_residual: float = 1e-10
    max_outer: int = 200
    condg_max_iter: int | None = None
    broyden_skip_threshold: float = 1e-14
    # below sqrt(eps) relative step size z = f(y) - f(x) is rounding noise
    broyden_skip_rtol: float = float(np.sqrt(np.finfo(float).eps))
    feas_tol: float = FEAS_TOL

    def __post_init__(self):
        thetas = [self.theta] if np.isscalar(self.theta) else list(self.theta)
        if not thetas:
            raise ValueError("theta schedule is empty")
        if any(not (0.0 <= t < 0.5) for t in thetas):
            raise ValueError("every theta_k must lie in [0, 0.5)")

    def theta_at(self, k: int) -> float:
        if np.isscalar(self.theta):
            return float(self.theta)
        seq = list(self.theta)
        return float(seq[min(k, len(seq) - 1)])


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray
    residual_before: float
    theta_used: float
    y: np.ndarray | None = None
    B: np.ndarray | None = None
    B_next: np.ndarray | None = None
    B_frobenius: float | None = None
    dd_operator_norm: float | None = None
    dd_coincident: bool = False
    condg_iterations: int = 0
    took_projection: bool = False
    update_applied: bool = False
    secant_gap: float | None = None
    step_norm: float | None = None
    z_norm: float | None = None
    certificate: fs.ProjectionCertificate | None = None

    @property
    def terminal(self) -> bool:
        return self.y is None


@dataclass
class SolveOutcome:
    status: str
    final_point: np.ndarray
    trace: list[IterationRecord]
    message: str = ""

    @property
    def iterations(self) -> int:
        return self.trace[-1].k if self.trace else 0

    @property
    def final_residual(self) -> float:
        return self.trace[-1].residual_before if self.trace else float("nan")


CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
SUBPROBLEM_FAILURE = "SubproblemFailure"
PROJECTION_FAILURE = "ProjectionFailure"


@dataclass
class SolverState:
    k: int
    x_prev: np.ndarray
    x: np.ndarray
    B: np.ndarray


def broyden_update(B, s, z, skip_threshold: float = 1e-14) -> np.ndarray:
    """Rank-one least-change update enforcing ``B' s = z``."""
    B = np.asarray(B, dtype=float)
    s, z = as_vector(s), as_vector(z)
    ss = float(np.dot(s, s))
    if np.sqrt(ss) <= skip_threshold:
        raise ZeroStep(f"|s| = {np.sqrt(ss):g} below {skip_threshold:g}")
    return B + np.outer(z - B @ s, s) / ss


def init_b0(mode, problem: ProblemSpec, x0) -> np.ndarray:
    x0 = as_vector(x0)
    n = problem.dimension
    if isinstance(mode, np.ndarray) or not isinstance(mode, str):
        B0 = np.asarray(mode, dtype=float)
        if B0.shape != (n, n):
            raise ValueError(f"explicit B0 has shape {B0.shape}, expected {(n, n)}")
        return B0.copy()
    if mode == "identity":
        return np.eye(n)
    if mode in ("fd_jacobian", "fd"):
        return fd_jacobian(problem.f, x0)
    if mode == "analytic":
        if problem.analytic_jacobian_f is None:
            raise MissingJacobian("b0 mode 'analytic' needs analytic_jacobian_f")
        return np.asarray(problem.analytic_jacobian_f(x0), dtype=float)
    raise ValueError(f"unknown b0 mode {mode!r}")


def step(problem: ProblemSpec, config: SolverConfig, state: SolverState):
    """One outer iteration.

    Returns ``(new_state, record, converged)``. When the current point
    already meets the residual tolerance no work is done, ``new_state`` is
    None and the record is terminal.
    """
    k, x_prev, x, B = state.k, state.x_prev, state.x, state.B
    theta = config.theta_at(k)
    v = problem.value(x)
    res = sv.residual(problem.term, x, v)
    record = IterationRecord(k=k, x=x.copy(), residual_before=res, theta_used=theta)
    if res <= config.tol_residual:
        return None, record, True

    dd = first_order_dd(problem.g, x_prev, x)
    if dd.any_coincident:
        log.debug("k=%d: divided difference used derivative fallback %s", k, dd.coincidence_flags)
    A = B + dd.operator
    record.B = B.copy()
    record.B_frobenius = float(np.linalg.norm(B))
    record.dd_operator_norm = operator_norm(dd.operator)
    record.dd_coincident = dd.any_coincident

    y = sv.solve_linearized_inclusion(problem.term, v, A, x).point
    s = y - x
    z = evaluate(problem.f, y) - evaluate(problem.f, x)
    record.y = y.copy()
    record.step_norm = float(np.linalg.norm(s))
    record.z_norm = float(np.linalg.norm(z))
    skip = max(config.broyden_skip_threshold, config.broyden_skip_rtol * (1.0 + np.linalg.norm(x)))
    try:
        B_next = broyden_update(B, s, z, skip)
        record.update_applied = True
        record.secant_gap = float(np.linalg.norm(B_next @ s - z))
    except ZeroStep:
        log.debug("k=%d: step below skip threshold, B kept", k)
        B_next = B
    record.B_next = B_next.copy()

    if fs.contains(problem.set, y, config.feas_tol):
        x_next = y
    else:
        max_iter = config.condg_max_iter or fs.default_condg_max_iter(theta)
        cert = fs.condg_project(problem.set, y, x, x, theta, max_iter)
        x_next = cert.point
        record.took_projection = True
        record.condg_iterations = cert.inner_iterations
        record.certificate = cert
    return SolverState(k + 1, x, x_next, B_next), record, False


def solve(problem: ProblemSpec, config: SolverConfig, x_minus1, x0) -> SolveOutcome:
    x_minus1, x0 = as_vector(x_minus1), as_vector(x0)
    for label, pt in (("x_minus1", x_minus1), ("x0", x0)):
        if pt.size != problem.dimension:
            raise ValueError(f"{label} has dimension {pt.size}, expected {problem.dimension}")
        if not fs.contains(problem.set, pt, config.feas_tol):
            raise InfeasibleStart(f"{label} = {pt} is not in the feasible set")
    state = SolverState(0, x_minus1, x0, init_b0(config.b0_mode, problem, x0))
    trace: list[IterationRecord] = []
    while True:
        if state.k >= config.max_outer:
            res = problem.residual(state.x)
            trace.append(IterationRecord(state.k, state.x.copy(), res, config.theta_at(state.k)))
            status = CONVERGED if res <= config.tol_residual else MAX_ITERATIONS
            return SolveOutcome(status, state.x, trace)
        try:
            new_state, record, converged = step(problem, config, state)
        except SubproblemError as exc:
            return SolveOutcome(SUBPROBLEM_FAILURE, state.x, trace, str(exc))
        except MaxInnerIterations as exc:
            return SolveOutcome(PROJECTION_FAILURE, state.x, trace, str(exc))
        trace.append(record)
        if converged:
            return SolveOutcome(CONVERGED, state.x, trace)
        state = new_state


def iterates(trace: Sequence[IterationRecord]) -> list[np.ndarray]:
    return [rec.x for rec in trace]


def q_linear_rate(trace: Sequence[IterationRecord], x_star) -> list[float]:
    """Ratios |x_{k+1} - x*| / |x_k - x*| while |x_k - x*| > 1e-13."""
    x_star = as_vector(x_star)
    errs = [float(np.linalg.norm(x - x_star)) for x in iterates(trace)]
    ratios = [errs[i + 1] / errs[i] for i in range(len(errs) - 1) if errs[i] > 1e-13]
    if not ratios:
        raise InsufficientTrace("need two iterates with the first away from x*")
    return ratios


@dataclass(frozen=True)
class DeteriorationRow:
    k: int
    lhs: float
    rhs: float
    holds: bool


def bounded_deterioration_check(trace: Sequence[IterationRecord], problem: ProblemSpec) -> list[DeteriorationRow]:
    """Evaluate |B_{k+1} - J*| <= |B_k - J*| + L/2 (|y_k - x*| + |x_k - x*|)."""
    if problem.known_solution is None or problem.analytic_jacobian_f is None or problem.lipschitz_L is None:
        raise MissingGroundTruth("needs known_solution, analytic_jacobian_f and lipschitz_L")
    x_star = problem.known_solution
    J_star = np.asarray(problem.analytic_jacobian_f(x_star), dtype=float)
    L = problem.lipschitz_L
    rows = []
    for rec in trace:
        if rec.terminal:
            continue
        before = operator_norm(rec.B - J_star)
        if not rec.update_applied:
            rows.append(DeteriorationRow(rec.k, before, before, True))
            continue
        lhs = operator_norm(rec.B_next - J_star)
        rhs = before + 0.5 * L * (np.linalg.norm(rec.y - x_star) + np.linalg.norm(rec.x - x_star))
        rows.append(DeteriorationRow(rec.k, lhs, float(rhs), bool(lhs <= rhs + 1e-10)))
    return rows


def secant_holds(rec: IterationRecord) -> bool:
    return rec.secant_gap <= 1e-12 * (1.0 + rec.z_norm)


def rank_one_holds(rec: IterationRecord) -> bool:
    """Second singular value of B_{k+1} - B_k is negligible.

    Subtracting the stored matrices leaves O(eps |B|) noise in every entry,
    so the second singular value is also accepted below 1e-14 max(1, |B|).
    """
    sv_ = np.linalg.svd(rec.B_next - rec.B, compute_uv=False)
    if len(sv_) < 2:
        return True
    floor = 1e-14 * max(1.0, operator_norm(rec.B))
    return bool(sv_[1] <= 1e-12 * sv_[0] or sv_[1] <= floor)


def projection_holds(rec: IterationRecord, next_x, set_) -> bool:
    cert = fs.verify_inexact_projection(set_, next_x, rec.y, rec.x, rec.theta_used)
    return cert.valid
