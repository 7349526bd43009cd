"""Customer-rate estimation error over an hour for each planner, averaged
over seeded runs, with the stationary counter as the best case.

    python scripts/estimation_error.py --runs 100 --out results/estimation_error.csv
"""

import argparse
import sys
from pathlib import Path

from modhail.network import generate_graph
from modhail.sim import estimation_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--planners", default="sensing,ev,cc:0.9")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--graph-seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    graph = generate_graph(33, 106, args.graph_seed)
    series = estimation_benchmark(graph, args.planners.split(","), runs=args.runs, workers=args.workers)
    lines = ["minute,planner,mse_mean,mse_sd"]
    for name in sorted(series):
        t, mean, sd = series[name]
        lines += [f"{m:g},{name},{a:.6g},{b:.6g}" for m, a, b in zip(t, mean, sd)]
        print(f"{name:>10}: mse {mean[0]:.4f} -> {mean[-1]:.4f} ({1 - mean[-1] / mean[0]:.0%} lower)",
              file=sys.stderr)
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
