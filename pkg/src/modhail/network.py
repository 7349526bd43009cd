"""Directed road/path network with precomputed minimum-travel-time routes.

A graph document is a JSON object::

    {"nodes": [{"id": 0, "x_m": 12.5, "y_m": 40.0}, ...],
     "links": [{"origin": 0, "dest": 1, "speed_class": "street"}, ...]}

Links may carry an explicit ``length_m``; otherwise the Euclidean distance
between the endpoint positions is used.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_CLASSES = {"street": 11.0, "path": 4.0}


class GraphError(ValueError):
    """Raised for malformed or unusable graph documents."""


@dataclass(frozen=True)
class Link:
    id: int
    origin: int
    dest: int
    length_m: float
    vehicle_speed_mps: float
    speed_class: str = "street"

    @property
    def travel_time_s(self) -> float:
        return self.length_m / self.vehicle_speed_mps


@dataclass(frozen=True)
class Route:
    origin: int
    dest: int
    links: tuple[int, ...]
    travel_time_s: float

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True, eq=False)
class NetworkGraph:
    positions: np.ndarray  # (N_n, 2) metres
    links: tuple[Link, ...]
    routes: dict = field(repr=False)
    out_links: tuple[tuple[int, ...], ...] = field(repr=False)
    travel_time: np.ndarray = field(repr=False)  # (N_n, N_n) seconds, zero diagonal

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_links(self) -> int:
        return len(self.links)

    def route(self, origin: int, dest: int) -> Route:
        return self.routes[(origin, dest)]

    def routes_from(self, origin: int) -> list[Route]:
        return [self.routes[(origin, d)] for d in range(self.n_nodes) if d != origin]

    def link_times_min(self) -> np.ndarray:
        return np.array([l.travel_time_s / 60.0 for l in self.links])

    def to_document(self) -> dict:
        return {
            "nodes": [
                {"id": i, "x_m": float(x), "y_m": float(y)}
                for i, (x, y) in enumerate(self.positions)
            ],
            "links": [
                {"origin": l.origin, "dest": l.dest, "speed_class": l.speed_class}
                for l in self.links
            ],
        }

    def summary(self) -> str:
        return f"{self.n_nodes} nodes, {self.n_links} links, {len(self.routes)} routes"


def dumps_document(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_graph(graph: NetworkGraph, path) -> None:
    Path(path).write_text(dumps_document(graph.to_document()))


def load_graph(source) -> NetworkGraph:
    """Build a validated graph from a document (dict, JSON text, or path)."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        source = Path(source).read_text()
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise GraphError(f"graph document is not valid JSON: {exc}") from None
    if not isinstance(source, dict) or "nodes" not in source or "links" not in source:
        raise GraphError("graph document needs 'nodes' and 'links'")

    try:
        nodes = sorted(source["nodes"], key=lambda n: int(n["id"]))
        ids = [int(n["id"]) for n in nodes]
        positions = np.array([[float(n["x_m"]), float(n["y_m"])] for n in nodes], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed node entry: {exc}") from None
    if ids != list(range(len(ids))):
        raise GraphError("node ids must be dense and unique, 0..N-1")
    if len(ids) < 2:
        raise GraphError("graph needs at least two nodes")

    links = []
    seen = set()
    for k, entry in enumerate(source["links"]):
        try:
            o, d = int(entry["origin"]), int(entry["dest"])
            speed_class = entry.get("speed_class", "street")
            speed = float(entry.get("speed_mps", SPEED_CLASSES.get(speed_class, math.nan)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise GraphError(f"malformed link entry {k}: {exc}") from None
        if not (0 <= o < len(ids) and 0 <= d < len(ids)):
            raise GraphError(f"link {k} references unknown node")
        if o == d:
            raise GraphError(f"link {k} is a self-loop")
        if (o, d) in seen:
            raise GraphError(f"duplicate link {o}->{d}")
        seen.add((o, d))
        if not speed > 0:
            raise GraphError(f"link {k} has unknown speed class {speed_class!r}")
        length = entry.get("length_m")
        length = float(np.hypot(*(positions[d] - positions[o]))) if length is None else float(length)
        if not length > 0:
            raise GraphError(f"link {k} has nonpositive length")
        links.append(Link(k, o, d, length, speed, speed_class))

    n = len(ids)
    out = [[] for _ in range(n)]
    for l in links:
        out[l.origin].append(l.id)
    if not _strongly_connected(n, links):
        raise GraphError("graph is not strongly connected")
    links = tuple(links)
    routes = precompute_routes(n, links)
    tt = np.zeros((n, n))
    for (o, d), r in routes.items():
        tt[o, d] = r.travel_time_s
    positions.setflags(write=False)
    tt.setflags(write=False)
    return NetworkGraph(positions, links, routes, tuple(tuple(o) for o in out), tt)


def _reachable(n: int, adj: list[list[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _strongly_connected(n: int, links) -> bool:
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for l in links:
        fwd[l.origin].append(l.dest)
        bwd[l.dest].append(l.origin)
    return len(_reachable(n, fwd, 0)) == n and len(_reachable(n, bwd, 0)) == n


def precompute_routes(n_nodes: int, links) -> dict[tuple[int, int], Route]:
    """All-pairs minimum-travel-time routes.

    Ties between equal-time paths go to fewer links, then to the
    lexicographically smallest link-id sequence.
    """
    out = [[] for _ in range(n_nodes)]
    for l in links:
        out[l.origin].append(l)
    routes = {}
    for src in range(n_nodes):
        dist = _dijkstra(src, n_nodes, out)
        # Tight edges lie on some shortest path; among those pick fewest hops,
        # then the lexicographically smallest sequence, layer by layer.
        best = {src: ()}
        frontier = [src]
        while frontier:
            cand = {}
            for u in frontier:
                for l in out[u]:
                    v = l.dest
                    if v in best:
                        continue
                    slack = dist[u] + l.travel_time_s - dist[v]
                    if slack > 1e-9 * max(1.0, dist[v]):
                        continue
                    path = best[u] + (l.id,)
                    if v not in cand or path < cand[v]:
                        cand[v] = path
            best.update(cand)
            frontier = sorted(cand)
        for dst, path in best.items():
            if dst == src:
                continue
            tt = sum(links[i].travel_time_s for i in path)
            routes[(src, dst)] = Route(src, dst, path, tt)
    return routes


def _dijkstra(src: int, n: int, out) -> list[float]:
    dist = [math.inf] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for l in out[u]:
            nd = d + l.travel_time_s
            if nd < dist[l.dest]:
                dist[l.dest] = nd
                heapq.heappush(heap, (nd, l.dest))
    return dist


def generate_document(
    n_nodes: int,
    n_links: int,
    seed: int,
    width_m: float = 1400.0,
    height_m: float = 700.0,
    min_sep_m: float = 70.0,
    street_fraction: float = 0.5,
) -> dict:
    """Synthetic campus-scale graph document.

    Backbone is a closed tour through all nodes (both directions), topped up
    with two-way chords between near neighbours. An odd ``n_links`` gets one
    final one-way chord.
    """
    if n_nodes < 2:
        raise GraphError("need at least two nodes")
    if n_links < 2 * n_nodes:
        raise GraphError(f"n_links must be at least 2*n_nodes = {2 * n_nodes}")
    if n_links > n_nodes * (n_nodes - 1):
        raise GraphError(f"n_links cannot exceed n_nodes*(n_nodes-1) = {n_nodes * (n_nodes - 1)}")
    if n_nodes == 2 and n_links != 2:
        raise GraphError("two nodes admit exactly two links")
    rng = np.random.default_rng(seed)

    pts = []
    for _ in range(200 * n_nodes):
        p = rng.uniform([0.0, 0.0], [width_m, height_m])
        if all(np.hypot(*(p - q)) >= min_sep_m for q in pts):
            pts.append(p)
            if len(pts) == n_nodes:
                break
    else:
        raise GraphError("could not place nodes at the requested separation")
    pts = np.round(np.array(pts), 1)

    # Tour by angle about the centroid keeps backbone links short-ish.
    centre = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0]), kind="stable")
    pairs = []
    used = set()
    for i in range(n_nodes):
        u, v = int(order[i]), int(order[(i + 1) % n_nodes])
        if frozenset((u, v)) not in used:
            used.add(frozenset((u, v)))
            pairs.append((u, v))

    dist = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    candidates = sorted(
        (float(dist[u, v]), u, v)
        for u in range(n_nodes) for v in range(u + 1, n_nodes)
        if frozenset((u, v)) not in used
    )
    remaining = n_links - 2 * len(pairs)
    n_chords = remaining // 2
    # Random picks biased toward short chords.
    pool = list(candidates[: max(3 * n_chords, n_chords + 1)])
    chords = []
    while len(chords) < n_chords:
        if not pool:
            pool = [c for c in candidates if frozenset(c[1:]) not in used]
        j = int(rng.integers(len(pool)))
        _, u, v = pool.pop(j)
        if frozenset((u, v)) in used:
            continue
        used.add(frozenset((u, v)))
        chords.append((u, v))
    pairs += chords

    links = []
    for u, v in pairs:
        cls = "street" if rng.random() < street_fraction else "path"
        links.append({"origin": u, "dest": v, "speed_class": cls})
        links.append({"origin": v, "dest": u, "speed_class": cls})
    if remaining % 2:
        rest = [(u, v) for _, u, v in candidates if frozenset((u, v)) not in used]
        u, v = rest[int(rng.integers(len(rest)))]
        links.append({"origin": u, "dest": v, "speed_class": "street"})

    return {
        "nodes": [{"id": i, "x_m": float(x), "y_m": float(y)} for i, (x, y) in enumerate(pts)],
        "links": links,
    }


def generate_graph(n_nodes: int, n_links: int, seed: int) -> NetworkGraph:
    return load_graph(generate_document(n_nodes, n_links, seed))
