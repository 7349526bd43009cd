"""Fraction of customers served and worst horizon cost per planner over
paired-seed runs. Pass several cc risk levels to sweep eta.

    python scripts/service_comparison.py --planners sensing,cc:0.9,oracle --runs 100
    python scripts/service_comparison.py --planners cc:0.5,cc:0.7,cc:0.9 --runs 100
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from modhail.network import generate_graph
from modhail.sim import SimConfig, batch_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--planners", default="sensing,ev,cc:0.5,cc:0.7,cc:0.9,oracle")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--graph-seed", type=int, default=7)
    ap.add_argument("--prior-alpha", type=float, default=SimConfig.prior_alpha)
    ap.add_argument("--prior-beta", type=float, default=SimConfig.prior_beta)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, help="per-run csv")
    args = ap.parse_args()

    graph = generate_graph(33, 106, args.graph_seed)
    cfg = SimConfig(prior_alpha=args.prior_alpha, prior_beta=args.prior_beta)
    planners = args.planners.split(",")
    records = batch_run(graph, planners, args.runs, config=cfg, workers=args.workers)

    by = defaultdict(list)
    for r in records:
        by[r.planner].append(r)
    print(f"{'planner':>10} {'served':>8} {'sd':>6} {'max cost':>9} {'sd':>7}", file=sys.stderr)
    for name in planners:
        fs = np.array([r.fraction_served for r in by[name]])
        mc = np.array([r.max_horizon_cost for r in by[name]])
        print(f"{name:>10} {fs.mean():8.3f} {fs.std():6.3f} {mc.mean():9.1f} {mc.std():7.1f}", file=sys.stderr)

    if args.out:
        lines = ["planner,seed,customers_total,customers_served,fraction_served,max_horizon_cost"]
        lines += [f"{r.planner},{r.seed},{r.customers_total},{r.customers_served},"
                  f"{r.fraction_served:.6g},{r.max_horizon_cost:g}" for r in records]
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
