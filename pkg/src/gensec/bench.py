"""Benchmark registry, batch runner and certificate reports.

Every registered solution comes from an oracle independent of the solver:
a hand-derived root, a piecewise closed form, or active-set enumeration run
once when the registry is built.
"""

from __future__ import annotations

import dataclasses
import statistics
from dataclasses import dataclass, field

import numpy as np

from gensec import feasible_set as fs
from gensec import maps
from gensec import setvalued as sv
from gensec import solver as S
from gensec.errors import InsufficientTrace, MissingGroundTruth

DEFAULT_SEED = 20240917
INF = np.inf


@dataclass
class BenchmarkCase:
    name: str
    problem: S.ProblemSpec
    starts: list[tuple[np.ndarray, np.ndarray]]
    expected_status: str = S.CONVERGED
    tolerance_to_solution: float = 1e-8
    config_overrides: dict = field(default_factory=dict)
    oracle: str = ""


@dataclass
class CheckRow:
    k: int
    check: str
    holds: bool
    value: float | None = None


@dataclass
class BenchRow:
    case: str
    start: int
    status: str
    expected_status: str
    iterations: int
    final_residual: float
    distance_to_solution: float | None
    median_tail_ratio: float | None
    max_tail_ratio: float | None
    feasible: bool
    secant_pass: int
    secant_total: int
    projection_pass: int
    projection_total: int
    deterioration_pass: int
    deterioration_total: int

    @property
    def matched(self) -> bool:
        return self.status == self.expected_status


@dataclass
class BenchReport:
    rows: list[BenchRow]

    @property
    def all_matched(self) -> bool:
        return all(r.matched for r in self.rows)


def _circle_line(name, set_, starts, **overrides):
    problem = S.ProblemSpec(
        dimension=2,
        f=maps.circle_line,
        set=set_,
        analytic_jacobian_f=maps.circle_line_jacobian,
        known_solution=np.array([0.0, 3.0]),
        # |f'(x) - f'(y)| = 2 |x - y|
        lipschitz_L=2.0,
        name=name,
    )
    return BenchmarkCase(name, problem, starts, config_overrides=overrides, oracle="hand root: 0 + 3 = 3, 0 + 9 = 9")


def _abs_mixed(name, set_, starts):
    f = maps.Affine(np.array([[1.0]]), np.array([-2.0]))
    problem = S.ProblemSpec(
        dimension=1,
        f=f,
        g=maps.ScaledAbs(0.5),
        set=set_,
        analytic_jacobian_f=f.jacobian,
        known_solution=np.array([4.0 / 3.0]),
        lipschitz_L=0.0,
        name=name,
    )
    return BenchmarkCase(name, problem, starts, tolerance_to_solution=1e-10, oracle="x > 0 branch: 1.5 x = 2")


def _lcp_case():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    f = maps.Affine(M, np.array([-1.0, -1.0]))
    term = sv.NormalConeBox(np.zeros(2), np.full(2, INF))
    (sol,) = sv.brute_force_inclusion(term, f(np.zeros(2)), M, np.zeros(2))
    problem = S.ProblemSpec(
        dimension=2,
        f=f,
        term=term,
        set=fs.Box(np.zeros(2), np.ones(2)),
        analytic_jacobian_f=f.jacobian,
        known_solution=sol.point,
        lipschitz_L=0.0,
        name="lcp_2d",
    )
    starts = [
        (np.array([0.2, 0.2]), np.array([0.3, 0.3])),
        (np.array([0.40, 0.30]), np.array([0.36, 0.39])),
        (np.array([0.30, 0.41]), np.array([0.28, 0.30])),
    ]
    return BenchmarkCase("lcp_2d", problem, starts, oracle="active-set enumeration over 4 patterns")


def _product_cone_case():
    # x1 + x2 + x3 >= 1, x1 = x2, x2 = x3: the ray x1 = x2 = x3 >= 1/3
    M = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
    f = maps.Affine(M, np.array([-1.0, 0.0, 0.0]))
    term = sv.ProductCone(1)
    base = np.full(3, 1.0 / 3.0)
    # offsets with negative coordinate sum project onto the ray's endpoint
    offsets = [(-0.05, 0.02, -0.03), (0.04, -0.06, -0.01), (-0.02, -0.02, 0.03)]
    starts, solutions = [], []
    for off in offsets:
        x0 = base + np.array(off)
        x_minus1 = base + 0.5 * np.array(off[::-1])
        starts.append((x_minus1, x0))
        solutions.append(sv.brute_force_inclusion(term, f(x0), M, x0)[0].point)
    x_star = solutions[0]
    assert all(np.linalg.norm(s - x_star) < 1e-12 for s in solutions)
    problem = S.ProblemSpec(
        dimension=3,
        f=f,
        term=term,
        analytic_jacobian_f=f.jacobian,
        known_solution=x_star,
        lipschitz_L=0.0,
        name="product_cone_3d",
    )
    return BenchmarkCase("product_cone_3d", problem, starts, oracle="least-change solution by sign-pattern enumeration")


def random_vip_family(seed: int = DEFAULT_SEED, count: int = 3, n: int = 5) -> list[BenchmarkCase]:
    """Strongly monotone 5-D NCPs over [0, inf)^n with C = [0, 3]^n.

    f(x) = M x + c + 0.5 (x - x_hat)^2 where x_hat solves the affine part
    (found by enumeration); the quadratic term vanishes to second order at
    x_hat, so x_hat stays a solution.
    """
    rng = np.random.default_rng(seed)
    term = sv.NormalConeBox(np.zeros(n), np.full(n, INF))
    set_ = fs.Box(np.zeros(n), np.full(n, 3.0))
    cases = []
    while len(cases) < count:
        G = rng.normal(size=(n, n))
        M = G.T @ G / n + np.eye(n)
        c = rng.normal(scale=1.5, size=n)
        (sol,) = sv.brute_force_inclusion(term, c, M, np.zeros(n))
        x_hat = sol.point
        if not fs.contains(set_, x_hat, 0.0) or np.max(x_hat) > 2.5:
            continue
        f = maps.PerturbedAffine(M, c, x_hat)
        starts = []
        for _ in range(2):
            pair = []
            for _ in range(2):
                d = rng.normal(size=n)
                pair.append(np.clip(x_hat + 0.08 * d / np.linalg.norm(d), 0.0, 3.0))
            starts.append(tuple(pair))
        name = f"vip5_{len(cases)}"
        problem = S.ProblemSpec(
            dimension=n,
            f=f,
            term=term,
            set=set_,
            analytic_jacobian_f=f.jacobian,
            known_solution=x_hat,
            lipschitz_L=1.0,
            name=name,
        )
        cases.append(BenchmarkCase(name, problem, starts, oracle=f"active-set enumeration, seed {seed}"))
    return cases


def registry(seed: int = DEFAULT_SEED) -> list[BenchmarkCase]:
    near_star = [
        (np.array([0.05, 2.95]), np.array([-0.03, 2.96])),
        (np.array([-0.06, 2.92]), np.array([0.05, 2.97])),
        (np.array([0.07, 2.95]), np.array([0.02, 3.06])),
    ]
    tight = [
        (np.array([0.05, 2.95]), np.array([-0.03, 2.93])),
        (np.array([-0.06, 2.92]), np.array([0.05, 2.97])),
        (np.array([0.0, 2.9]), np.array([0.07, 2.94])),
    ]
    cases = [
        _circle_line("circle_line", fs.WholeSpace(2), near_star),
        _circle_line("circle_line_box", fs.Box([-1.0, 2.0], [1.0, 4.0]), near_star),
        # top face close to x*: early identity-B0 steps overshoot and CondG projects
        _circle_line("circle_line_tight_box", fs.Box([-1.0, 2.0], [1.0, 3.01]), tight, b0_mode="identity"),
        _abs_mixed("abs_mixed_1d", fs.WholeSpace(1), [(np.array([0.5]), np.array([1.0])), (np.array([1.3]), np.array([1.4]))]),
        _abs_mixed("abs_mixed_1d_box", fs.Box([0.0], [2.0]), [(np.array([1.25]), np.array([1.4])), (np.array([1.4]), np.array([1.3]))]),
        _lcp_case(),
        _product_cone_case(),
        *random_vip_family(seed),
    ]
    return sorted(cases, key=lambda c: c.name)


def check_certificates(problem: S.ProblemSpec, outcome: S.SolveOutcome) -> list[CheckRow]:
    """Per-iteration secant, rank-one, projection and deterioration checks."""
    rows: list[CheckRow] = []
    trace = outcome.trace
    for i, rec in enumerate(trace):
        if rec.terminal:
            continue
        if rec.update_applied:
            rows.append(CheckRow(rec.k, "secant", S.secant_holds(rec), rec.secant_gap))
            rows.append(CheckRow(rec.k, "rank_one", S.rank_one_holds(rec)))
        if rec.took_projection:
            nxt = trace[i + 1].x if i + 1 < len(trace) else outcome.final_point
            cert = fs.verify_inexact_projection(problem.set, nxt, rec.y, rec.x, rec.theta_used)
            rows.append(CheckRow(rec.k, "projection", cert.valid, cert.sup_inner - cert.threshold))
    try:
        for d in S.bounded_deterioration_check(trace, problem):
            rows.append(CheckRow(d.k, "deterioration", d.holds, d.lhs - d.rhs))
    except MissingGroundTruth:
        pass
    return rows


def _count(rows, *names):
    sel = [r for r in rows if r.check in names]
    return sum(r.holds for r in sel), len(sel)


def run_case(case: BenchmarkCase, start_index: int, config: S.SolverConfig) -> BenchRow:
    cfg = dataclasses.replace(config, **case.config_overrides)
    x_minus1, x0 = case.starts[start_index]
    problem = case.problem
    outcome = S.solve(problem, cfg, x_minus1, x0)
    checks = check_certificates(problem, outcome)
    x_star = problem.known_solution
    dist = median = worst = None
    if x_star is not None:
        dist = float(np.linalg.norm(outcome.final_point - x_star))
        try:
            ratios = S.q_linear_rate(outcome.trace, x_star)
            median, worst = float(statistics.median(ratios)), float(max(ratios))
        except InsufficientTrace:
            pass
    sec_pass, sec_total = _count(checks, "secant", "rank_one")
    proj_pass, proj_total = _count(checks, "projection")
    det_pass, det_total = _count(checks, "deterioration")
    return BenchRow(
        case=case.name,
        start=start_index,
        status=outcome.status,
        expected_status=case.expected_status,
        iterations=outcome.iterations,
        final_residual=outcome.final_residual,
        distance_to_solution=dist,
        median_tail_ratio=median,
        max_tail_ratio=worst,
        feasible=fs.contains(problem.set, outcome.final_point, cfg.feas_tol),
        secant_pass=sec_pass,
        secant_total=sec_total,
        projection_pass=proj_pass,
        projection_total=proj_total,
        deterioration_pass=det_pass,
        deterioration_total=det_total,
    )


def run_bench(cases, config: S.SolverConfig | None = None) -> BenchReport:
    config = config or S.SolverConfig()
    rows = []
    for case in sorted(cases, key=lambda c: c.name):
        for i in range(len(case.starts)):
            row = run_case(case, i, config)
            if case.expected_status == S.CONVERGED and row.status == S.CONVERGED:
                ok = row.distance_to_solution is None or row.distance_to_solution <= case.tolerance_to_solution
                if not ok:
                    row.status = "WrongSolution"
            rows.append(row)
    return BenchReport(rows)
