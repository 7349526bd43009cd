"""Command-line entry point.

Every subcommand writes comma-separated tables preceded by a ``#`` header
echoing the resolved configuration. Settings resolve as flags, then a JSON
``--config`` file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .belief import BetaBelief, GammaBelief, NodeBelief, mc_oracle_pmf, predictive_pmf
from .hailing import planner_comparison_experiment
from .network import GraphError, dumps_document, generate_document, generate_graph, load_graph
from .sim import SimConfig, batch_run, mean_mse_series, parse_planner


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


class Table:
    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match the table schema")
        self.rows.append(values)

    def render(self) -> str:
        out = [",".join(self.columns)]
        out += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in self.rows]
        return "\n".join(out) + "\n"


def header(command: str, settings: dict) -> str:
    lines = [f"# modhail {__version__} {command}"]
    for key in sorted(settings):
        value = settings[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _planners(text: str) -> list[str]:
    try:
        return [str(parse_planner(t)) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ----- subcommands -----
def cmd_gen_graph(args) -> str:
    doc = generate_document(args.nodes, args.links, args.seed)
    graph = load_graph(doc)
    Path(args.out).write_text(dumps_document(doc))
    return header("gen-graph", _settings(args)) + graph.summary() + "\n"


def cmd_pmf(args) -> str:
    node = NodeBelief(GammaBelief(args.alpha, args.beta), BetaBelief(args.a, args.b))
    dist = predictive_pmf(node, args.t_pred, tail_tol=args.tail_tol)
    cols = ["c", "probability", "cumulative"]
    mc = None
    if args.mc_check:
        cols.append("mc_probability")
        mc = mc_oracle_pmf(node, args.t_pred, args.mc_check, args.mc_seed)
    table = Table(cols)
    cum = np.cumsum(dist.pmf)
    for c, (p, s) in enumerate(zip(dist.pmf, cum)):
        row = [c, p, s]
        if mc is not None:
            row.append(mc[c] if c < len(mc) else 0.0)
        table.add(*row)
    settings = _settings(args)
    settings["tail_mass"] = fmt(dist.tail_mass)
    return header("pmf", settings) + table.render()


def cmd_compare_planners(args) -> str:
    if any(s < 0 for s in args.stds):
        raise ValueError("std grid must be nonnegative")
    rows = planner_comparison_experiment(
        std_grid=tuple(args.stds), mean_rate=args.mean_rate, n_nodes=args.nodes, eta=args.eta,
        trials=args.trials, seed=args.seed, t_pred=args.t_pred,
    )
    table = Table(["std", "planner", "mean_cost", "mean_cost_sd", "max_cost", "max_cost_sd"])
    for r in rows:
        table.add(r.std, r.planner, r.mean_cost, r.mean_cost_sd, r.max_cost, r.max_cost_sd)
    return header("compare-planners", _settings(args)) + table.render()


def _graph(args):
    if args.graph:
        return load_graph(Path(args.graph))
    return generate_graph(args.nodes, args.links, args.graph_seed)


def _sim_config(args) -> SimConfig:
    cfg = SimConfig(
        fleet_size=args.fleet_size, horizon_s=args.horizon_s, duration_s=args.duration_s,
        step_s=args.step_s, route_len_links=args.route_len, prior_alpha=args.prior_alpha,
        prior_beta=args.prior_beta,
    )
    cfg.validate()
    return cfg


def _mse_table(series: dict) -> Table:
    table = Table(["minute", "planner", "mse_mean", "mse_sd"])
    for name in sorted(series):
        minutes, mean, sd = series[name]
        for t, m, s in zip(minutes, mean, sd):
            table.add(t, name, m, s)
    return table


def _run_settings(args, graph) -> dict:
    settings = _settings(args)
    settings["graph_summary"] = graph.summary()
    settings["run_seeds"] = f"{args.seed}..{args.seed + args.runs - 1}"
    return settings


def cmd_simulate(args) -> str:
    if args.runs < 1:
        raise ValueError("runs must be >= 1")
    graph = _graph(args)
    records = batch_run(graph, args.planners, args.runs, args.seed, _sim_config(args), args.workers)
    summary = Table(["planner", "runs", "fraction_served_mean", "fraction_served_sd",
                     "max_cost_mean", "max_cost_sd", "mean_cost_mean"])
    by = {}
    for r in records:
        by.setdefault(r.planner, []).append(r)
    for name in args.planners:
        rs = by[name]
        fs = np.array([r.fraction_served for r in rs])
        mc = np.array([r.max_horizon_cost for r in rs])
        summary.add(name, len(rs), fs.mean(), fs.std(), mc.mean(), mc.std(),
                    float(np.mean([r.mean_horizon_cost for r in rs])))
    out = header("simulate", _run_settings(args, graph))
    out += "# table=summary\n" + summary.render()
    out += "# table=mse\n" + _mse_table(mean_mse_series(records)).render()
    if args.per_run:
        runs = Table(["planner", "seed", "customers_total", "customers_served", "customers_expired",
                      "fraction_served", "max_horizon_cost", "mean_horizon_cost", "final_mse"])
        for r in records:
            runs.add(r.planner, r.seed, r.customers_total, r.customers_served, r.customers_expired,
                     r.fraction_served, r.max_horizon_cost, r.mean_horizon_cost, r.rate_mse[-1][1])
        Path(args.per_run).write_text(header("simulate per-run", _run_settings(args, graph)) + runs.render())
    return out


def cmd_estimation_bench(args) -> str:
    if args.runs < 1:
        raise ValueError("runs must be >= 1")
    graph = _graph(args)
    planners = list(args.planners)
    if args.stationary and "stationary" not in planners:
        planners.append("stationary")
    records = batch_run(graph, planners, args.runs, args.seed, _sim_config(args), args.workers)
    return header("estimation-bench", _run_settings(args, graph)) + _mse_table(mean_mse_series(records)).render()


# ----- parser -----
def _add_sim_args(p, planners: str):
    p.add_argument("--graph", help="graph document (JSON); generated when omitted")
    p.add_argument("--nodes", type=int, default=33)
    p.add_argument("--links", type=int, default=106)
    p.add_argument("--graph-seed", type=int, default=7)
    p.add_argument("--planners", type=_planners, default=_planners(planners))
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="first run seed; run i uses seed+i")
    p.add_argument("--fleet-size", type=int, default=5)
    p.add_argument("--horizon-s", type=float, default=300.0)
    p.add_argument("--duration-s", type=float, default=3600.0)
    p.add_argument("--step-s", type=float, default=1.0)
    p.add_argument("--route-len", type=int, default=5)
    p.add_argument("--prior-alpha", type=float, default=SimConfig.prior_alpha)
    p.add_argument("--prior-beta", type=float, default=SimConfig.prior_beta)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modhail", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of default settings (flags override it)")
    parser.add_argument("--output", "-o", help="write the table here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a synthetic graph document")
    p.add_argument("--nodes", type=int, default=33)
    p.add_argument("--links", type=int, default=106)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True, help="path of the graph document to write")
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("pmf", help="predictive customer-count distribution")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--t-pred", type=float, default=1.0, help="minutes")
    p.add_argument("--tail-tol", type=float, default=1e-9)
    p.add_argument("--mc-check", type=int, default=0, metavar="N", help="append an N-sample Monte Carlo column")
    p.add_argument("--mc-seed", type=int, default=0)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("compare-planners", help="expected-value vs chance-constrained cost table")
    p.add_argument("--stds", type=_floats, default=[1.0, 2.0, 3.0, 4.0])
    p.add_argument("--mean-rate", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=33)
    p.add_argument("--eta", type=float, default=0.99)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--t-pred", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare_planners)

    p = sub.add_parser("simulate", help="closed-loop simulation summary and MSE tables")
    _add_sim_args(p, "sensing,ev,cc:0.9,oracle")
    p.add_argument("--per-run", help="also write a per-(planner, seed) table here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimation-bench", help="customer-rate MSE over time per planner")
    _add_sim_args(p, "sensing,ev,cc:0.9")
    p.add_argument("--no-stationary", dest="stationary", action="store_false",
                   help="omit the stationary counter baseline")
    p.set_defaults(func=cmd_estimation_bench)
    return parser


_SKIP = {"func", "config", "output", "command"}


def _settings(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _SKIP and v is not None}


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(conf, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(k.replace("-", "_") for k in conf) - set(known) - _SKIP)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        defaults = {}
        for key, value in conf.items():
            action = known[key.replace("-", "_")]
            if action.type is not None and isinstance(value, (str, int, float)):
                value = action.type(str(value) if action.type in (_floats, _planners) else value)
            elif action.type in (_floats, _planners) and isinstance(value, list):
                value = action.type(",".join(str(v) for v in value))
            defaults[action.dest] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except argparse.ArgumentTypeError as exc:
        print(f"modhail: error: {exc}", file=sys.stderr)
        return 2
    try:
        text = args.func(args)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    except (ValueError, GraphError, ArithmeticError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"modhail: error: {msg}", file=sys.stderr)
        return 1
    return 0
