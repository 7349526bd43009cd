"""Mean and worst-case allocation cost of the expected-value and
chance-constrained planners as count uncertainty grows.

    python scripts/planner_comparison.py --out results/planner_comparison.csv
"""

import argparse
import sys
from pathlib import Path

from modhail.hailing import planner_comparison_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--stds", default="1,2,3,4")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--eta", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    stds = tuple(float(s) for s in args.stds.split(","))
    rows = planner_comparison_experiment(std_grid=stds, eta=args.eta, trials=args.trials, seed=args.seed)
    lines = ["std,planner,mean_cost,max_cost"]
    lines += [f"{r.std:g},{r.planner},{r.mean_cost:.4f},{r.max_cost:.4f}" for r in rows]
    by = {(r.std, r.planner): r for r in rows}
    for s in stds:
        ev, cc = by[s, "ev"], by[s, "cc"]
        print(f"std {s:g}: mean ev {ev.mean_cost:7.2f} cc {cc.mean_cost:7.2f} | "
              f"max ev {ev.max_cost:7.2f} cc {cc.max_cost:7.2f}", file=sys.stderr)
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
