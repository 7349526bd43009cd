"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that the terminal summary prints
at the end of the session (see conftest.py). Simulation batches are shared
between criteria; each criterion's runtime is the sum of the batch times of
the planners it uses.
"""

import itertools
import math
import time

import numpy as np
import pytest

from modhail.belief import BetaBelief, GammaBelief, NodeBelief, hyp2f1_nonpositive_z, mc_oracle_pmf, predictive_pmf
from modhail.cli import main
from modhail.hailing import cc_allocation, cc_cost_matrix, ev_allocation, planner_comparison_experiment
from modhail.sim import SimConfig, batch_run, mean_mse_series

from test_hailing import brute_cc, brute_ev, grid_dists

RUNS = 100
REPORT: list[str] = []


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    REPORT.append(line)
    print(line)
    return ok


class Batches:
    """Lazily run each planner once over the paired seeds 0..RUNS-1."""

    def __init__(self, graph):
        self.graph = graph
        self.records = {}
        self.seconds = {}

    def get(self, planner):
        if planner not in self.records:
            t0 = time.perf_counter()
            self.records[planner] = batch_run(self.graph, [planner], RUNS, 0, SimConfig())
            self.seconds[planner] = time.perf_counter() - t0
        return self.records[planner]

    def served(self, planner):
        return float(np.mean([r.fraction_served for r in self.get(planner)]))

    def max_cost(self, planner):
        return float(np.mean([r.max_horizon_cost for r in self.get(planner)]))

    def mse(self, planner):
        _, mean, _ = mean_mse_series(self.get(planner))[planner]
        return mean

    def runtime(self, *planners):
        for p in planners:
            self.get(p)
        return sum(self.seconds[p] for p in planners)


@pytest.fixture(scope="module")
def batches(campus_graph):
    return Batches(campus_graph)


def test_predictive_pmf_matches_monte_carlo():
    t0 = time.perf_counter()
    worst = (0.0, None)
    grid = list(itertools.product([0.5, 1, 5], [0.5, 2], [1, 3], [1, 3], [1, 5]))
    for i, (al, be, a, b, t) in enumerate(grid):
        node = NodeBelief(GammaBelief(al, be), BetaBelief(a, b))
        d = predictive_pmf(node, t)
        mc = mc_oracle_pmf(node, t, 10**6, seed=i)
        n = max(len(d.pmf), len(mc))
        p, q = np.zeros(n), np.zeros(n)
        p[: len(d.pmf)] = d.pmf
        q[: len(mc)] = mc
        tv = 0.5 * (np.abs(p - q).sum() + d.tail_mass)
        worst = max(worst, (tv, (al, be, a, b, t)))
    secs = time.perf_counter() - t0
    ok = worst[0] < 0.01 and secs < 60
    assert report("pmf vs Monte Carlo", ok,
                  f"max TV {worst[0]:.4f} at {worst[1]} over {len(grid)} points (< 0.01), {secs:.1f}s (< 60s)")


def test_hyp2f1_identities():
    t0 = time.perf_counter()
    errs = []
    for a, c in itertools.product([0.5, 1, 2, 7], [1.5, 3.0]):
        errs.append(abs(hyp2f1_nonpositive_z(a, 2.5, c, 0.0) - 1.0))
    for a, z in itertools.product([0.5, 1, 2, 7], [0.0, -0.5, -1.0, -10.0]):
        for b in (0.7, 2.0, 5.0):
            exact = (1 - z) ** (-a)
            errs.append(abs(hyp2f1_nonpositive_z(a, b, b, z) / exact - 1))
    for z in (-0.5, -1.0, -3.0, -10.0):
        exact = math.log1p(-z) / -z
        errs.append(abs(hyp2f1_nonpositive_z(1, 1, 2, z) / exact - 1))
    secs = time.perf_counter() - t0
    ok = max(errs) <= 1e-10 and secs < 1
    assert report("hyp2f1 identity suite", ok,
                  f"{len(errs)} cases, max rel error {max(errs):.1e} (<= 1e-10), {secs:.2f}s (< 1s)")


def test_allocators_match_enumeration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    ev_bad = cc_bad = 0
    for _ in range(200):
        n, fleet = int(rng.integers(1, 6)), int(rng.integers(0, 7))
        E = np.round(rng.uniform(0, 5, n), 1).tolist()
        if abs(ev_allocation(E, fleet).total_cost - brute_ev(E, fleet)) > 1e-9:
            ev_bad += 1
    for _ in range(200):
        n, fleet = int(rng.integers(1, 6)), int(rng.integers(0, 7))
        eta = float(rng.choice([0.5, 0.7, 0.9, 0.99]))
        K = cc_cost_matrix([grid_dists[i] for i in rng.integers(len(grid_dists), size=n)], fleet, eta)
        if abs(cc_allocation(K, fleet).total_cost - brute_cc(K, fleet)) > 1e-9:
            cc_bad += 1
    secs = time.perf_counter() - t0
    ok = ev_bad == 0 and cc_bad == 0 and secs < 10
    assert report("allocator optimality", ok,
                  f"ev mismatches {ev_bad}/200, cc mismatches {cc_bad}/200, {secs:.1f}s (< 10s)")


def test_planner_comparison_ordering():
    t0 = time.perf_counter()
    rows = planner_comparison_experiment(std_grid=(1.0, 2.0, 3.0, 4.0), mean_rate=1.0, n_nodes=33,
                                         eta=0.99, trials=1000, seed=0)
    secs = time.perf_counter() - t0
    by = {(r.std, r.planner): r for r in rows}
    mean_ok = all(by[s, "ev"].mean_cost <= by[s, "cc"].mean_cost for s in (1.0, 2.0, 3.0, 4.0))
    max_ok = all(by[s, "cc"].max_cost <= by[s, "ev"].max_cost for s in (2.0, 3.0, 4.0))
    detail = "; ".join(
        f"std {s:g}: mean ev {by[s, 'ev'].mean_cost:.1f} cc {by[s, 'cc'].mean_cost:.1f}, "
        f"max ev {by[s, 'ev'].max_cost:.1f} cc {by[s, 'cc'].max_cost:.1f}" for s in (1.0, 2.0, 3.0, 4.0))
    ok = mean_ok and max_ok and secs < 120
    assert report("planner comparison ordering", ok, f"{detail}; {secs:.1f}s (< 120s)")


def test_estimation_error_profile(batches):
    planners = ["sensing", "ev", "cc:0.9"]
    mse = {p: batches.mse(p) for p in planners + ["stationary"]}
    drops = {p: 1 - mse[p][-1] / mse[p][0] for p in planners}
    secs = batches.runtime(*planners, "stationary")
    a = all(d >= 0.7 for d in drops.values())
    final = {p: m[-1] for p, m in mse.items()}
    b = min(final, key=final.get) == "stationary"
    c = final["sensing"] > final["cc:0.9"]
    ok = a and b and c and secs < 600
    detail = (", ".join(f"{p} drop {drops[p]:.0%}" for p in planners) + " (>= 70%); final "
              + ", ".join(f"{p} {v:.4f}" for p, v in final.items()) + f"; {secs:.0f}s (< 600s)")
    assert report("estimation error profile", ok, detail)


def test_service_comparison(batches):
    served = {p: batches.served(p) for p in ("sensing", "cc:0.9", "oracle")}
    cost = {p: batches.max_cost(p) for p in ("sensing", "cc:0.9")}
    secs = batches.runtime("sensing", "cc:0.9", "oracle")
    order = served["oracle"] >= served["cc:0.9"] >= served["sensing"]
    ratio = served["cc:0.9"] / served["sensing"]
    cost_ratio = cost["cc:0.9"] / cost["sensing"]
    ok = order and ratio >= 1.3 and cost_ratio <= 0.85 and secs < 600
    assert report("service comparison", ok,
                  f"served oracle {served['oracle']:.3f} cc:0.9 {served['cc:0.9']:.3f} sensing {served['sensing']:.3f}; "
                  f"cc/sensing served {ratio:.2f} (>= 1.3), max cost {cost['cc:0.9']:.1f} vs {cost['sensing']:.1f} "
                  f"ratio {cost_ratio:.2f} (<= 0.85); {secs:.0f}s (< 600s)")


def test_risk_sweep(batches):
    served = {eta: batches.served(f"cc:{eta:g}") for eta in (0.5, 0.7, 0.9)}
    best = max(served, key=served.get)
    ok = best == 0.9
    assert report("risk sweep", ok,
                  ", ".join(f"cc:{e:g} {v:.3f}" for e, v in served.items()) + f" over {RUNS} seeds; best cc:{best:g}")


def test_cli_determinism(tmp_path, capsys):
    commands = {
        "gen-graph": ["gen-graph", "--seed", "3", "--out", "{dir}/g.json"],
        "pmf": ["pmf", "--alpha", "2", "--mc-check", "10000", "--mc-seed", "5"],
        "compare-planners": ["compare-planners", "--stds", "1,3", "--trials", "100", "--seed", "9"],
        "simulate": ["simulate", "--nodes", "12", "--links", "30", "--runs", "1", "--seed", "42",
                     "--duration-s", "900", "--per-run", "{dir}/runs.csv"],
        "estimation-bench": ["estimation-bench", "--nodes", "12", "--links", "30", "--runs", "1", "--seed", "42",
                             "--duration-s", "900"],
    }
    bad = []
    for name, argv in commands.items():
        outputs = []
        d = tmp_path / name
        d.mkdir()
        for _ in range(2):
            assert main([a.format(dir=d) for a in argv]) == 0
            files = [p for p in sorted(d.iterdir())]
            outputs.append(capsys.readouterr().out.encode() + b"".join(p.read_bytes() for p in files))
            for p in files:
                p.unlink()
        if outputs[0] != outputs[1]:
            bad.append(name)
    assert report("determinism", not bad, f"{len(commands) - len(bad)}/{len(commands)} subcommands byte-identical"
                  + (f"; differing: {', '.join(bad)}" if bad else ""))
