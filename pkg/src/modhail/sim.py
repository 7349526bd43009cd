"""Fixed-step ride-hailing simulation on a network graph.

Pedestrians arrive on routes as a discrete-time Poisson process. A fraction
are hailing customers who wait at their origin node for ``wait_limit_s``
before giving up and walking. Vehicles park at nodes chosen by a hailing
planner, explore the network otherwise, and learn link pedestrian rates and
node customer fractions from what they see.

Pedestrian kinematics are deterministic once a pedestrian starts walking,
so link-entry times are scheduled at spawn instead of being stepped.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import explore
from .belief import (
    BeliefStore, GammaBelief, NodeBelief, expected_customers, gamma_update, beta_update,
    node_rate_from_links, predictive_pmf,
)
from .hailing import (
    Allocation, TruncatedSupportError, cc_allocation, cc_cost_matrix, ev_allocation, oracle_allocation,
)
from .network import NetworkGraph, Route

PLANNERS = ("sensing", "ev", "cc", "oracle", "stationary")

# Named random streams: the arrival realization does not depend on the planner.
STREAM_ARRIVALS = 1
STREAM_SCENARIO = 2
STREAM_VEHICLES = 3


def stream(seed: int, which: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), which])


@dataclass(frozen=True)
class PlannerSpec:
    name: str
    eta: float | None = None

    def __str__(self):
        return f"{self.name}:{self.eta:g}" if self.eta is not None else self.name


def parse_planner(text: str) -> PlannerSpec:
    """Parse ``name[:eta]``; ``cc`` defaults to eta 0.9."""
    name, _, eta = text.strip().partition(":")
    if name not in PLANNERS:
        raise ValueError(f"unknown planner {name!r}; choose from {', '.join(PLANNERS)}")
    if name == "cc":
        eta = float(eta) if eta else 0.9
        if not 0 < eta < 1:
            raise ValueError("cc risk level must lie in (0, 1)")
        return PlannerSpec("cc", eta)
    if eta:
        raise ValueError(f"planner {name!r} takes no risk level")
    return PlannerSpec(name)


@dataclass
class DemandScenario:
    routes: list  # Route
    rates: list  # pedestrians per minute, per route
    fractions: list  # customer fraction, per route
    wait_limit_s: float = 30.0
    pickup_radius_m: float = 20.0
    walk_speed_mps: float = 1.5

    def __post_init__(self):
        if not len(self.routes) == len(self.rates) == len(self.fractions):
            raise ValueError("routes, rates and fractions must align")
        if any(g < 0 for g in self.rates) or any(not 0 <= f <= 1 for f in self.fractions):
            raise ValueError("rates must be nonnegative and fractions in [0, 1]")
        if not (self.wait_limit_s > 0 and self.pickup_radius_m > 0 and self.walk_speed_mps > 0):
            raise ValueError("wait limit, pickup radius and walk speed must be positive")

    def true_customer_rates(self, n_nodes: int) -> np.ndarray:
        lam = np.zeros(n_nodes)
        for r, g, f in zip(self.routes, self.rates, self.fractions):
            lam[r.origin] += f * g
        return lam

    def true_link_rates(self, n_links: int) -> np.ndarray:
        mu = np.zeros(n_links)
        for r, g in zip(self.routes, self.rates):
            for l in r.links:
                mu[l] += g
        return mu


def make_paper_scenario(graph: NetworkGraph, seed: int, n_routes: int = 10, n_customer_routes: int = 3,
                        rate_per_min: float = 1.0) -> DemandScenario:
    """Ten 1 ped/min routes from distinct origins, three of them all customers."""
    if graph.n_nodes < n_routes:
        raise ValueError(f"scenario needs at least {n_routes} nodes, graph has {graph.n_nodes}")
    rng = stream(seed, STREAM_SCENARIO)
    origins = rng.choice(graph.n_nodes, size=n_routes, replace=False)
    routes = []
    for o in origins:
        d = int(rng.integers(graph.n_nodes - 1))
        d = d + 1 if d >= o else d
        routes.append(graph.route(int(o), d))
    customer = set(rng.choice(n_routes, size=n_customer_routes, replace=False).tolist())
    fractions = [1.0 if i in customer else 0.0 for i in range(n_routes)]
    return DemandScenario(routes, [rate_per_min] * n_routes, fractions)


@dataclass
class SimConfig:
    fleet_size: int = 5
    horizon_s: float = 300.0
    duration_s: float = 3600.0
    step_s: float = 1.0
    route_len_links: int = 5
    mse_every_s: float = 60.0
    # Link-rate prior Gamma(alpha, beta): mean 1 ped/min, variance 10.
    prior_alpha: float = 0.1
    prior_beta: float = 0.1
    record_trace: bool = False

    def validate(self):
        if not (self.prior_alpha > 0 and self.prior_beta > 0):
            raise ValueError("prior hyperparameters must be positive")
        if self.fleet_size < 0 or self.route_len_links < 1:
            raise ValueError("fleet_size must be >= 0 and route_len_links >= 1")
        if not (self.step_s > 0 and self.horizon_s > 0 and self.duration_s > 0):
            raise ValueError("times must be positive")
        for name in ("horizon_s", "duration_s", "mse_every_s"):
            ratio = getattr(self, name) / self.step_s
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(f"step_s must divide {name}")


@dataclass
class Pedestrian:
    id: int
    route: Route
    is_customer: bool
    spawn_time_s: float
    walk_start_s: float | None = None  # None while waiting or once served
    served: bool = False


@dataclass
class SimMetrics:
    customers_total: int = 0
    customers_served: int = 0
    customers_expired: int = 0
    customers_waiting: int = 0
    horizon_costs: list = field(default_factory=list)
    horizon_allocations: list = field(default_factory=list)
    rate_mse: list = field(default_factory=list)  # (minutes, mse)

    @property
    def fraction_served(self) -> float:
        return self.customers_served / self.customers_total if self.customers_total else 0.0

    @property
    def max_horizon_cost(self) -> float:
        return max(self.horizon_costs) if self.horizon_costs else 0.0


class VehicleState:
    """One vehicle. ``mode`` is explore, idle, to_post, post or serve."""

    __slots__ = ("id", "mode", "node", "link", "pos", "path", "target", "passenger", "enter_time")

    def __init__(self, vid: int, node: int):
        self.id = vid
        self.mode = "idle"
        self.node = node  # -1 while on a link
        self.link = -1
        self.pos = 0.0  # metres along the current link
        self.path: list[int] = []
        self.target = -1
        self.passenger: Pedestrian | None = None
        self.enter_time = 0.0


class Simulation:
    def __init__(self, graph: NetworkGraph, scenario: DemandScenario, planner: PlannerSpec | str,
                 config: SimConfig | None = None, seed: int = 0, pmf_cache: dict | None = None):
        self.graph = graph
        self.scenario = scenario
        self.planner = parse_planner(planner) if isinstance(planner, str) else planner
        self.config = config or SimConfig()
        self.config.validate()
        self.seed = seed
        self.beliefs = BeliefStore(graph.n_links, graph.n_nodes,
                                   GammaBelief(self.config.prior_alpha, self.config.prior_beta))
        self.metrics = SimMetrics()
        self._pmf_cache = {} if pmf_cache is None else pmf_cache
        self._link_times_min = graph.link_times_min()
        self._lengths = np.array([l.length_m for l in graph.links])
        self._speeds = np.array([l.vehicle_speed_mps for l in graph.links])
        self.t = 0.0
        self.n_steps = int(round(self.config.duration_s / self.config.step_s))

        self.true_rates = scenario.true_customer_rates(graph.n_nodes)
        self._arrivals = self._draw_arrivals()
        rng = stream(seed, STREAM_VEHICLES)
        fleet = self.config.fleet_size
        starts = rng.choice(graph.n_nodes, size=fleet, replace=fleet > graph.n_nodes)
        self.vehicles = [VehicleState(i, int(n)) for i, n in enumerate(starts)]

        self.pedestrians: list[Pedestrian] = []
        self.waiting: list[Pedestrian] = []
        self._link_entries = [[] for _ in graph.links]
        self._events = defaultdict(list)  # step -> [(time, link, node or -1)]
        self.posts = np.zeros(graph.n_nodes, dtype=int)
        self._horizon_counts = np.zeros(graph.n_nodes, dtype=int)
        self.trace: list | None = [] if self.config.record_trace else None
        self._watch: dict[int, float] = {}  # node -> time a parked vehicle began watching

        # Stationary counter: node-level beliefs fed by every node arrival.
        self._counter_rates = [
            node_rate_from_links(self.beliefs.links[l] for l in graph.out_links[n]) for n in range(graph.n_nodes)
        ]
        self._counter_fractions = list(self.beliefs.fractions)
        self._counter_peds = np.zeros(graph.n_nodes, dtype=int)
        self._counter_cust = np.zeros(graph.n_nodes, dtype=int)
        self._counter_since = 0.0

    # ----- arrivals -----
    def _draw_arrivals(self):
        rng = stream(self.seed, STREAM_ARRIVALS)
        sc = self.scenario
        p = np.array(sc.rates) * self.config.step_s / 60.0
        counts = rng.poisson(p, size=(self.n_steps, len(sc.routes)))
        steps, routes = np.nonzero(counts)
        arrivals = defaultdict(list)
        for s, r in zip(steps.tolist(), routes.tolist()):
            for _ in range(int(counts[s, r])):
                arrivals[s].append((r, bool(rng.random() < sc.fractions[r])))
        self._customer_counts = np.zeros((self.n_steps, self.graph.n_nodes), dtype=int)
        for s, items in arrivals.items():
            for r, cust in items:
                if cust:
                    self._customer_counts[s, sc.routes[r].origin] += 1
        return arrivals

    def realized_customers(self, start_step: int, stop_step: int) -> np.ndarray:
        return self._customer_counts[start_step:stop_step].sum(axis=0)

    # ----- pedestrians -----
    def _start_walking(self, ped: Pedestrian, t0: float):
        """Schedule link arrivals after the first; the first is logged at spawn."""
        ped.walk_start_s = t0
        step_s = self.config.step_s
        links = ped.route.links
        t = t0 + self._lengths[links[0]] / self.scenario.walk_speed_mps
        for l in links[1:]:
            self._events[int(math.floor(t / step_s + 1e-9))].append((t, l, self.graph.links[l].origin))
            t += self._lengths[l] / self.scenario.walk_speed_mps

    def pedestrian_position(self, ped: Pedestrian, t: float) -> np.ndarray:
        """Planar position of a pedestrian at time ``t``."""
        pos = self.graph.positions
        if ped.walk_start_s is None or t <= ped.walk_start_s:
            return pos[ped.route.origin].copy()
        dist = (t - ped.walk_start_s) * self.scenario.walk_speed_mps
        for l in ped.route.links:
            link = self.graph.links[l]
            if dist <= link.length_m:
                f = dist / link.length_m
                return pos[link.origin] + f * (pos[link.dest] - pos[link.origin])
            dist -= link.length_m
        return pos[ped.route.dest].copy()

    def _posted_at(self, node: int) -> bool:
        return any(v.mode == "post" and v.node == node for v in self.vehicles)

    def _spawn(self, step: int):
        for r, is_customer in self._arrivals.get(step, ()):
            route = self.scenario.routes[r]
            ped = Pedestrian(len(self.pedestrians), route, is_customer, self.t)
            self.pedestrians.append(ped)
            # Every route arrival is a pedestrian arrival on the route's first
            # link, whether or not the pedestrian later rides instead.
            self._link_entries[route.links[0]].append(self.t)
            if is_customer:
                self.metrics.customers_total += 1
                self._horizon_counts[route.origin] += 1
                self._counter_cust[route.origin] += 1
                self.waiting.append(ped)
            else:
                self._counter_peds[route.origin] += 1
                if self._posted_at(route.origin):
                    self.beliefs.observe_node(route.origin, 0, 1)
                self._start_walking(ped, self.t)

    def _process_events(self, step: int):
        events = self._events.pop(step, None)
        if not events:
            return
        events.sort()
        for t, l, node in events:
            self._link_entries[l].append(t)
            self._counter_peds[node] += 1
            if self._posted_at(node):
                self.beliefs.observe_node(node, 0, 1)

    def _flush_watch(self, node: int, t_end: float):
        """A parked vehicle sees every arrival onto the node's outgoing links."""
        start = self._watch[node]
        if t_end <= start:
            return
        for l in self.graph.out_links[node]:
            entries = self._link_entries[l]
            m = bisect.bisect_left(entries, t_end) - bisect.bisect_left(entries, start)
            self.beliefs.observe_link(l, m, (t_end - start) / 60.0)

    def _update_watches(self, t: float, refresh: bool = False):
        posted = {v.node for v in self.vehicles if v.mode == "post"}
        for n in list(self._watch):
            if n not in posted or refresh:
                self._flush_watch(n, t)
                del self._watch[n]
        for n in posted:
            self._watch.setdefault(n, t)

    # ----- vehicles -----
    def _vehicle_xy(self, v: VehicleState) -> np.ndarray:
        pos = self.graph.positions
        if v.link < 0:
            return pos[v.node]
        link = self.graph.links[v.link]
        f = v.pos / link.length_m
        return pos[link.origin] + f * (pos[link.dest] - pos[link.origin])

    def _time_to(self, v: VehicleState, node: int) -> float:
        if v.link < 0:
            return float(self.graph.travel_time[v.node, node])
        link = self.graph.links[v.link]
        rem = (link.length_m - v.pos) / link.vehicle_speed_mps
        return rem + float(self.graph.travel_time[link.dest, node])

    def _next_node(self, v: VehicleState) -> int:
        return v.node if v.link < 0 else self.graph.links[v.link].dest

    def _route_from(self, v: VehicleState, node: int) -> list[int]:
        u = self._next_node(v)
        return [] if u == node else list(self.graph.route(u, node).links)

    def _fill_posts(self):
        assigned = Counter(v.target for v in self.vehicles if v.mode in ("to_post", "post"))
        deficit = {n: int(c) - assigned.get(n, 0) for n, c in enumerate(self.posts) if c > assigned.get(n, 0)}
        if not deficit:
            return
        free = [v for v in self.vehicles if v.mode in ("explore", "idle")]
        pairs = sorted((self._time_to(v, n), v.id, n) for v in free for n in deficit)
        taken = set()
        for _, vid, n in pairs:
            if vid in taken or deficit[n] <= 0:
                continue
            v = self.vehicles[vid]
            taken.add(vid)
            deficit[n] -= 1
            v.target = n
            v.path = self._route_from(v, n)
            v.mode = "post" if (v.link < 0 and v.node == n) else "to_post"

    def _explore(self, v: VehicleState):
        plan = explore.VisitPlan()
        for o in self.vehicles:
            if o is not v and o.mode == "explore":
                if o.link >= 0:
                    plan.visit_counts[o.link] += 1
                plan.visit_counts.update(o.path)
        route, _ = explore.best_route(self.graph, v.node, plan, self.beliefs.links,
                                      self._link_times_min, self.config.route_len_links)
        v.mode = "explore"
        v.target = -1
        v.path = list(route.links)
        if self.trace is not None:
            self.trace.append({"t": self.t, "vehicle": v.id, "explore": list(route.links)})

    def _dispatch(self, v: VehicleState):
        """Give a vehicle standing at a node with nothing to do its next job."""
        v.mode = "idle"
        self._fill_posts()
        if v.mode == "idle":
            self._explore(v)

    def _arrive(self, v: VehicleState, t_exit: float):
        link = self.graph.links[v.link]
        entries = self._link_entries[v.link]
        m = bisect.bisect_left(entries, t_exit) - bisect.bisect_left(entries, v.enter_time)
        self.beliefs.observe_link(v.link, m, (t_exit - v.enter_time) / 60.0)
        v.node = link.dest
        v.link = -1
        v.pos = 0.0
        if v.path:
            return
        if v.mode == "serve":
            v.passenger = None
            self._dispatch(v)
        elif v.mode == "to_post":
            v.mode = "post"
        elif v.mode in ("explore", "idle"):
            self._dispatch(v)

    def _move(self, v: VehicleState, t0: float, dt: float):
        remaining = dt
        while remaining > 1e-12:
            if v.link < 0:
                if not v.path:
                    if v.mode == "idle":
                        self._dispatch(v)
                    if not v.path:
                        return
                v.link = v.path.pop(0)
                v.node = -1
                v.pos = 0.0
                v.enter_time = t0 + (dt - remaining)
            speed = self._speeds[v.link]
            left = (self._lengths[v.link] - v.pos) / speed
            if left <= remaining:
                remaining -= left
                v.pos = self._lengths[v.link]
                self._arrive(v, t0 + (dt - remaining))
            else:
                v.pos += speed * remaining
                remaining = 0.0

    # ----- customers -----
    def _pickups(self):
        if not self.waiting:
            return
        radius = self.scenario.pickup_radius_m
        pos = self.graph.positions
        still = []
        refill = False
        for ped in self.waiting:
            origin = ped.route.origin
            best = None
            for v in self.vehicles:
                if v.mode == "serve":
                    continue
                d = float(np.hypot(*(self._vehicle_xy(v) - pos[origin])))
                if d <= radius and (best is None or (d, v.id) < best[:2]):
                    best = (d, v.id, v)
            if best is None:
                still.append(ped)
                continue
            v = best[2]
            refill |= v.mode in ("post", "to_post")
            ped.served = True
            self.metrics.customers_served += 1
            self.beliefs.observe_node(origin, 1, 0)
            if self.trace is not None:
                self.trace.append({"t": self.t, "vehicle": v.id, "pickup": ped.id, "node": origin})
            v.mode = "serve"
            v.target = -1
            v.passenger = ped
            v.path = self._route_from(v, ped.route.dest)
            if v.link < 0 and not v.path:  # already at the destination
                v.passenger = None
                self._dispatch(v)
        self.waiting = still
        if refill:
            self._fill_posts()

    def _expire(self, t_now: float):
        keep = []
        for ped in self.waiting:
            if t_now - ped.spawn_time_s >= self.scenario.wait_limit_s - 1e-9:
                self.metrics.customers_expired += 1
                self._start_walking(ped, ped.spawn_time_s + self.scenario.wait_limit_s)
            else:
                keep.append(ped)
        self.waiting = keep

    # ----- planning -----
    def node_belief(self, n: int) -> NodeBelief:
        return self.beliefs.node_belief(self.graph, n)

    def _dist(self, node: NodeBelief, t_pred: float, tail_tol: float = 1e-9):
        key = (node.rate.alpha, node.rate.beta, node.fraction.a, node.fraction.b, t_pred, tail_tol)
        d = self._pmf_cache.get(key)
        if d is None:
            d = predictive_pmf(node, t_pred, tail_tol=tail_tol)
            if len(self._pmf_cache) > 200_000:
                self._pmf_cache.clear()
            self._pmf_cache[key] = d
        return d

    def _cc_column(self, node: NodeBelief, t_pred: float, eta: float) -> np.ndarray:
        # Only the cdf around the eta-quantile matters; start loose and
        # tighten until every window radius is settled.
        tol = (1.0 - eta) / 4.0
        while True:
            d = self._dist(node, t_pred, tol)
            try:
                return cc_cost_matrix([d], self.config.fleet_size, eta)[:, 0]
            except TruncatedSupportError:
                if tol <= 1e-9:
                    raise
                tol = max(tol / 100.0, 1e-9)

    def decide(self, step: int) -> Allocation:
        cfg = self.config
        n = self.graph.n_nodes
        t_pred = cfg.horizon_s / 60.0
        name = self.planner.name
        if name in ("sensing", "stationary"):
            return Allocation((0,) * n, 0.0)
        if name == "oracle":
            stop = min(self.n_steps, step + int(round(cfg.horizon_s / cfg.step_s)))
            return oracle_allocation(self.realized_customers(step, stop).tolist(), cfg.fleet_size)
        beliefs = [self.node_belief(i) for i in range(n)]
        if name == "ev":
            return ev_allocation([expected_customers(b, t_pred) for b in beliefs], cfg.fleet_size)
        K = np.column_stack([self._cc_column(b, t_pred, self.planner.eta) for b in beliefs])
        return cc_allocation(K, cfg.fleet_size)

    def _start_horizon(self, step: int):
        self._update_watches(self.t, refresh=True)
        if self.metrics.horizon_allocations:
            self._close_horizon()
        alloc = self.decide(step)
        self.posts = np.array(alloc.counts, dtype=int)
        self.metrics.horizon_allocations.append(alloc.counts)
        if self.trace is not None:
            self.trace.append({"t": self.t, "posts": {str(n): c for n, c in enumerate(alloc.counts) if c}})
        for v in self.vehicles:
            if v.mode in ("post", "to_post"):
                v.mode = "idle"
                v.target = -1
                v.path = []
        self._fill_posts()
        for v in self.vehicles:
            if v.mode == "idle" and v.link < 0:
                self._explore(v)

    def _close_horizon(self):
        v = np.array(self.metrics.horizon_allocations[-1])
        self.metrics.horizon_costs.append(float(((self._horizon_counts - v) ** 2).sum()))
        self._horizon_counts[:] = 0

    # ----- estimation -----
    def estimated_rates(self) -> np.ndarray:
        if self.planner.name == "stationary":
            dt = (self.t - self._counter_since) / 60.0
            if dt > 0:
                for n in range(self.graph.n_nodes):
                    peds = int(self._counter_peds[n])
                    cust = int(self._counter_cust[n])
                    self._counter_rates[n] = gamma_update(self._counter_rates[n], peds + cust, dt)
                    self._counter_fractions[n] = beta_update(self._counter_fractions[n], cust, peds)
                self._counter_peds[:] = 0
                self._counter_cust[:] = 0
                self._counter_since = self.t
            return np.array([f.mean() * g.mean() for f, g in zip(self._counter_fractions, self._counter_rates)])
        return self.beliefs.estimated_customer_rates(self.graph)

    def _record_mse(self):
        self._update_watches(self.t, refresh=True)
        err = self.estimated_rates() - self.true_rates
        self.metrics.rate_mse.append((self.t / 60.0, float(np.mean(err**2))))

    # ----- main loop -----
    def run(self) -> SimMetrics:
        cfg = self.config
        horizon_steps = int(round(cfg.horizon_s / cfg.step_s))
        mse_steps = int(round(cfg.mse_every_s / cfg.step_s))
        for step in range(self.n_steps):
            self.t = step * cfg.step_s
            if step % mse_steps == 0:
                self._record_mse()
            if step % horizon_steps == 0:
                self._start_horizon(step)
            self._spawn(step)
            self._process_events(step)
            self._pickups()
            for v in self.vehicles:
                self._move(v, self.t, cfg.step_s)
            self.t = (step + 1) * cfg.step_s
            self._pickups()
            self._expire(self.t)
            self._update_watches(self.t)
        self._close_horizon()
        self._record_mse()
        self.metrics.customers_waiting = len(self.waiting)
        return self.metrics


def run(graph: NetworkGraph, scenario: DemandScenario, planner, config: SimConfig | None = None,
        seed: int = 0, pmf_cache: dict | None = None) -> SimMetrics:
    return Simulation(graph, scenario, planner, config, seed, pmf_cache).run()


# ----- batches -----
@dataclass
class RunRecord:
    planner: str
    seed: int
    customers_total: int
    customers_served: int
    customers_expired: int
    fraction_served: float
    max_horizon_cost: float
    mean_horizon_cost: float
    rate_mse: list

    @classmethod
    def from_metrics(cls, planner, seed, m: SimMetrics) -> "RunRecord":
        return cls(str(planner), seed, m.customers_total, m.customers_served, m.customers_expired,
                   m.fraction_served, m.max_horizon_cost,
                   float(np.mean(m.horizon_costs)) if m.horizon_costs else 0.0, list(m.rate_mse))


def _one_run(args):
    graph, planner, config, seed = args
    scenario = make_paper_scenario(graph, seed)
    return RunRecord.from_metrics(planner, seed, Simulation(graph, scenario, planner, config, seed).run())


def batch_run(graph: NetworkGraph, planners, runs: int, base_seed: int = 0,
              config: SimConfig | None = None, workers: int = 1) -> list[RunRecord]:
    """Paired-seed runs on the standard scenario: run i of every planner uses
    seed ``base_seed + i`` for both the scenario and the arrivals."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    config = config or SimConfig()
    config.validate()
    specs = [parse_planner(p) if isinstance(p, str) else p for p in planners]
    jobs = [(graph, p, config, base_seed + i) for p in specs for i in range(runs)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_one_run, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cache: dict = {}
        out = []
        for g, p, c, s in jobs:
            sim = Simulation(g, make_paper_scenario(g, s), p, c, s, pmf_cache=cache)
            out.append(RunRecord.from_metrics(p, s, sim.run()))
    out.sort(key=lambda r: (str(r.planner), r.seed))
    return out


def mean_mse_series(records) -> dict:
    """planner -> (minutes, mean mse, sd mse) across runs."""
    by = defaultdict(list)
    for r in records:
        by[r.planner].append(r.rate_mse)
    out = {}
    for name, series in by.items():
        arr = np.array([[m for _, m in s] for s in series])
        out[name] = (np.array([t for t, _ in series[0]]), arr.mean(axis=0), arr.std(axis=0))
    return out


def estimation_benchmark(graph: NetworkGraph, planners, runs: int = 100, stationary_counter: bool = True,
                         base_seed: int = 0, config: SimConfig | None = None, workers: int = 1) -> dict:
    planners = [str(p) for p in planners]
    if stationary_counter and "stationary" not in planners:
        planners.append("stationary")
    return mean_mse_series(batch_run(graph, planners, runs, base_seed, config, workers))
