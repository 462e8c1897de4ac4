"""Tail error ratios |x_{k+1} - x*| / |x_k - x*| per registry case, for a few theta values.

Shows how the inexact-projection tolerance affects the local rate on the
constrained cases.
"""

import argparse
import statistics

import numpy as np

from gensec import bench
from gensec import solver as S


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--thetas", default="0,0.1,0.25,0.45")
    ap.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    args = ap.parse_args()
    thetas = [float(t) for t in args.thetas.split(",")]

    print(f"{'case':24s} " + " ".join(f"{'theta=' + str(t):>12s}" for t in thetas))
    for case in bench.registry(args.seed):
        cells = []
        for theta in thetas:
            cfg = S.SolverConfig(theta=theta, **case.config_overrides)
            meds = []
            for x_minus1, x0 in case.starts:
                out = S.solve(case.problem, cfg, x_minus1, x0)
                if out.status != S.CONVERGED:
                    meds.append(np.nan)
                    continue
                meds.append(statistics.median(S.q_linear_rate(out.trace, case.problem.known_solution)))
            cells.append(f"{np.nanmax(meds):12.3f}" if not np.all(np.isnan(meds)) else f"{'fail':>12s}")
        print(f"{case.name:24s} " + " ".join(cells))
    print("cells: worst median tail ratio over the case's starts")


if __name__ == "__main__":
    main()
