"""Run the benchmark registry and write the report next to a short summary.

    python scripts/run_benchmarks.py --out results/bench.csv
"""

import argparse
from pathlib import Path

from gensec import bench, cli
from gensec import solver as S


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/bench.csv")
    ap.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    ap.add_argument("--theta", type=float, default=0.25)
    args = ap.parse_args()

    report = bench.run_bench(bench.registry(args.seed), S.SolverConfig(theta=args.theta))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = "json" if out.suffix == ".json" else "csv"
    out.write_text(cli.render_report(report, fmt))

    print(f"{'case':24s} {'start':>5s} {'status':>13s} {'iters':>5s} {'residual':>10s} {'median rho':>10s}")
    for r in report.rows:
        med = "" if r.median_tail_ratio is None else f"{r.median_tail_ratio:.3f}"
        print(f"{r.case:24s} {r.start:5d} {r.status:>13s} {r.iterations:5d} {r.final_residual:10.2e} {med:>10s}")
    print(f"matched {sum(r.matched for r in report.rows)}/{len(report.rows)} -> {out}")


if __name__ == "__main__":
    main()
