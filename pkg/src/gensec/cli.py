"""Command-line entry point: ``gensec {solve,bench,check,project}``.

Exit codes: 0 success / converged, 1 input error, 2 iteration budget
exhausted, 3 solver or projection failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import statistics
import sys

import numpy as np

from gensec import bench
from gensec import feasible_set as fs
from gensec import solver as S
from gensec.errors import GensecError, InfeasibleStart, InsufficientTrace, MaxInnerIterations, ProblemFileError
from gensec.problem_file import load_problem, parse_set_argument

EXIT_OK, EXIT_INPUT, EXIT_MAXITER, EXIT_FAILURE = 0, 1, 2, 3

TRACE_HEADER = ["k", "residual", "step_norm", "theta", "condg_iters", "took_projection", "secant_gap", "err_to_xstar"]
B0_MODES = {"identity": "identity", "fd": "fd_jacobian", "analytic": "analytic"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def fmt(value) -> str:
    """Shortest round-trip text for numbers; blank for missing."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value) + 0.0)


def fmt_vector(x) -> str:
    return ",".join(fmt(v) for v in np.asarray(x, dtype=float))


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError as exc:
        raise ProblemFileError(f"cannot parse vector {text!r}") from exc


def resolve_seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get("GENSEC_SEED")
    return int(env) if env else bench.DEFAULT_SEED


def trace_rows(outcome: S.SolveOutcome, x_star):
    for rec in outcome.trace:
        err = None if x_star is None else float(np.linalg.norm(rec.x - x_star))
        yield [
            rec.k,
            rec.residual_before,
            rec.step_norm,
            rec.theta_used,
            rec.condg_iterations,
            rec.took_projection,
            rec.secant_gap,
            err,
        ]


def write_trace(outcome, x_star, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for row in trace_rows(outcome, x_star):
            writer.writerow([fmt(v) for v in row])


def _config_from(args) -> S.SolverConfig:
    return S.SolverConfig(
        theta=args.theta,
        b0_mode=B0_MODES[args.b0],
        tol_residual=args.tol,
        max_outer=args.max_iter,
    )


def _starts(args, problem):
    x0 = parse_vector(args.x0)
    x_minus1 = parse_vector(args.x_minus1) if args.x_minus1 else x0.copy()
    for label, x in (("--x0", x0), ("--x-1", x_minus1)):
        if x.size != problem.dimension:
            raise ProblemFileError(f"{label}: expected {problem.dimension} entries, got {x.size}")
    return x_minus1, x0


def _status_code(status: str) -> int:
    if status == S.CONVERGED:
        return EXIT_OK
    if status == S.MAX_ITERATIONS:
        return EXIT_MAXITER
    return EXIT_FAILURE


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    x_minus1, x0 = _starts(args, problem)
    outcome = S.solve(problem, _config_from(args), x_minus1, x0)
    if args.trace:
        write_trace(outcome, problem.known_solution, args.trace)
    print(f"status={outcome.status} k={outcome.iterations} residual={fmt(outcome.final_residual)}")
    if outcome.message:
        print(outcome.message, file=sys.stderr)
    return _status_code(outcome.status)


REPORT_FIELDS = [f.name for f in dataclasses.fields(bench.BenchRow)] + ["matched"]


def report_records(report: bench.BenchReport):
    for row in report.rows:
        rec = dataclasses.asdict(row)
        rec["matched"] = row.matched
        yield {k: rec[k] for k in REPORT_FIELDS}


def _json_value(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def render_report(report: bench.BenchReport, format_: str) -> str:
    records = list(report_records(report))
    if format_ == "json":
        clean = [{k: _json_value(v) for k, v in rec.items()} for rec in records]
        return json.dumps(clean, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for rec in records:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in rec.values()])
    return buf.getvalue()


def cmd_bench(args) -> int:
    cases = bench.registry(resolve_seed(args.seed))
    report = bench.run_bench(cases, S.SolverConfig(max_outer=args.max_iter))
    text = render_report(report, args.format)
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        matched = sum(r.matched for r in report.rows)
        print(f"rows={len(report.rows)} matched={matched}")
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.all_matched else EXIT_FAILURE


def cmd_check(args) -> int:
    problem = load_problem(args.problem)
    if args.require_deterioration and (problem.known_solution is None or problem.lipschitz_L is None):
        print("deterioration check needs known_solution and lipschitz_L in the problem file", file=sys.stderr)
        return EXIT_INPUT
    x_minus1, x0 = _starts(args, problem)
    outcome = S.solve(problem, _config_from(args), x_minus1, x0)
    rows = bench.check_certificates(problem, outcome)
    ok = outcome.status == S.CONVERGED
    print(f"status={outcome.status} k={outcome.iterations} residual={fmt(outcome.final_residual)}")
    for row in rows:
        print(f"k={row.k} {row.check} {'PASS' if row.holds else 'FAIL'} {fmt(row.value)}".rstrip())
        ok = ok and row.holds
    if problem.known_solution is not None:
        try:
            ratios = S.q_linear_rate(outcome.trace, problem.known_solution)
        except InsufficientTrace:
            ratios = []
        print("tail_ratios=" + ",".join(fmt(r) for r in ratios))
        if ratios:
            print(f"median_tail_ratio={fmt(statistics.median(ratios))}")
        ok = ok and all(r < 1 for r in ratios)
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_project(args) -> int:
    v = parse_vector(args.v)
    u = parse_vector(args.u) if args.u else v.copy()
    w0 = parse_vector(args.w0)
    n = v.size
    if u.size != n or w0.size != n:
        raise ProblemFileError("--v, --u and --w0 must have equal length")
    set_ = parse_set_argument(args.set, n)
    if set_.dimension != n:
        raise ProblemFileError(f"set has dimension {set_.dimension}, vectors have {n}")
    if not fs.contains(set_, w0, 1e-10):
        print(f"--w0 {fmt_vector(w0)} is not in the set", file=sys.stderr)
        return EXIT_INPUT
    try:
        cert = fs.condg_project(set_, v, u, w0, args.theta, args.max_iter)
    except MaxInnerIterations as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILURE
    print(f"w_plus={fmt_vector(cert.point)}")
    print(f"sup_inner={fmt(cert.sup_inner)}")
    print(f"threshold={fmt(cert.threshold)}")
    print(f"inner_iterations={cert.inner_iterations}")
    return EXIT_OK


def _add_solve_flags(p):
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--x0", required=True, help="comma-separated start point")
    p.add_argument("--x-1", dest="x_minus1", help="comma-separated previous point (default: x0)")
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--b0", choices=sorted(B0_MODES), default="fd")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=None, help="accepted for symmetry; solve is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gensec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a problem file")
    _add_solve_flags(p)
    p.add_argument("--trace", help="write the iteration trace as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run the benchmark registry")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="solve and verify every certificate")
    _add_solve_flags(p)
    p.add_argument("--require-deterioration", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("project", help="run CondG once")
    p.add_argument("--set", required=True, help="inline JSON set or path to a JSON file")
    p.add_argument("--v", required=True)
    p.add_argument("--u")
    p.add_argument("--w0", required=True)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--max-iter", type=int, default=None)
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except (ProblemFileError, InfeasibleStart) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GensecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
