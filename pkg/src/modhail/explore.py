"""Exploration routing that maximizes the expected drop in link-rate variance.

Each traversal of link ``l`` adds ``t_l`` minutes of observation, so after
``k`` planned visits the expected variance is ``alpha / (beta * (beta + k t_l))``.
Vehicles are routed one at a time, each seeing the visits already planned
for the vehicles before it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .belief import GammaBelief
from .network import NetworkGraph, Route


@dataclass
class VisitPlan:
    visit_counts: Counter = field(default_factory=Counter)
    routes: dict = field(default_factory=dict)

    def add(self, vehicle, route: Route) -> None:
        self.routes[vehicle] = route
        self.visit_counts.update(route.links)


def posterior_link_variance(belief: GammaBelief, traversal_time: float, visits: int) -> float:
    return belief.alpha / (belief.beta * (belief.beta + visits * traversal_time))


def _gain(counts, links, beliefs, times) -> float:
    extra = Counter(links)
    total = 0.0
    for l, k in extra.items():
        g = beliefs[l]
        have = counts.get(l, 0)
        total += posterior_link_variance(g, times[l], have) - posterior_link_variance(g, times[l], have + k)
    return total


def objective_gain(plan: VisitPlan, candidate, beliefs, link_times) -> float:
    """Total expected variance reduction from adding ``candidate`` to ``plan``.

    ``candidate`` is a Route or a link-id sequence; ``link_times`` are expected
    traversal times in minutes.
    """
    links = candidate.links if isinstance(candidate, Route) else tuple(candidate)
    return _gain(plan.visit_counts, links, beliefs, link_times)


def _extend(graph: NetworkGraph, links: list[int], length: int, counts, beliefs, times) -> list[int]:
    links = list(links)
    local = Counter(counts)
    local.update(links)
    node = graph.links[links[-1]].dest if links else None
    while len(links) < length:
        best = None
        for l in graph.out_links[node]:
            g = beliefs[l]
            have = local.get(l, 0)
            gain = posterior_link_variance(g, times[l], have) - posterior_link_variance(g, times[l], have + 1)
            key = (-gain, times[l], l)
            if best is None or key < best:
                best = key
        l = best[2]
        links.append(l)
        local[l] += 1
        node = graph.links[l].dest
    return links


def candidate_routes(graph: NetworkGraph, node: int, counts, beliefs, times, route_len_links: int = 5):
    """Precomputed routes from ``node`` of at most ``route_len_links`` links,
    each greedily extended to exactly that length."""
    out = []
    seen = set()
    starts = [r.links for r in graph.routes_from(node) if len(r.links) <= route_len_links]
    for links in starts:
        full = tuple(_extend(graph, list(links), route_len_links, counts, beliefs, times))
        if full not in seen:
            seen.add(full)
            out.append(full)
    return out


def _as_route(graph: NetworkGraph, origin: int, links) -> Route:
    tt = sum(graph.links[l].travel_time_s for l in links)
    return Route(origin, graph.links[links[-1]].dest, tuple(links), tt)


def best_route(graph, node, plan: VisitPlan, beliefs, times, route_len_links=5) -> tuple[Route, float]:
    if not graph.out_links[node]:
        raise ValueError(f"node {node} has no outgoing links")
    best = None
    for links in candidate_routes(graph, node, plan.visit_counts, beliefs, times, route_len_links):
        gain = _gain(plan.visit_counts, links, beliefs, times)
        tt = sum(times[l] for l in links)
        key = (-gain, tt, links)
        if best is None or key < best:
            best = key
    return _as_route(graph, node, best[2]), -best[0]


def assign_exploration_routes(vehicles, beliefs, graph: NetworkGraph, route_len_links: int = 5,
                              plan: VisitPlan | None = None, link_times=None) -> VisitPlan:
    """Greedy sequential route assignment.

    ``vehicles`` is a list of ``(vehicle_id, node)``; they are processed in
    ascending id order. ``plan`` may carry visits already committed by other
    vehicles, which later choices account for.
    """
    times = graph.link_times_min() if link_times is None else link_times
    plan = VisitPlan(Counter(plan.visit_counts), dict(plan.routes)) if plan else VisitPlan()
    for vid, node in sorted(vehicles):
        route, _ = best_route(graph, node, plan, beliefs, times, route_len_links)
        plan.add(vid, route)
    return plan
