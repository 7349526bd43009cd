"""Per-node vehicle counts under uncertain customer arrivals.

Node cost is ``(c_n - v_n)^2``. The expected-value planner plugs in E[c_n];
the chance-constrained planner bounds each node cost at probability ``eta``
and then allocates the fleet over the resulting cost matrix.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .belief import BetaBelief, GammaBelief, NodeBelief, PredictiveCountDist, predictive_pmf


@dataclass(frozen=True)
class Allocation:
    counts: tuple[int, ...]
    total_cost: float

    @property
    def n_vehicles(self) -> int:
        return sum(self.counts)


def ev_allocation(expected, fleet_size: int | None) -> Allocation:
    """Minimize sum (E_n - v_n)^2 subject to sum v_n <= fleet_size.

    The objective is separable and convex in each v_n, so adding one vehicle
    at a time where it lowers the cost most is exact. ``fleet_size=None``
    means no fleet limit.
    """
    expected = [float(e) for e in expected]
    if any(e < 0 for e in expected):
        raise ValueError("expected counts must be nonnegative")
    counts = [0] * len(expected)
    # Decrease from v -> v+1 is 2(E - v) - 1; keep a max-heap keyed by it.
    heap = [(-(2 * e - 1), n) for n, e in enumerate(expected)]
    heapq.heapify(heap)
    used = 0
    while heap and (fleet_size is None or used < fleet_size):
        neg, n = heapq.heappop(heap)
        if -neg <= 0:
            break
        counts[n] += 1
        used += 1
        heapq.heappush(heap, (-(2 * (expected[n] - counts[n]) - 1), n))
    cost = sum((e - v) ** 2 for e, v in zip(expected, counts))
    return Allocation(tuple(counts), cost)


class TruncatedSupportError(ValueError):
    """The truncated pmf cannot decide a window radius; more support is needed."""


def _window_radius(pmf: np.ndarray, cdf: np.ndarray, v: int, eta: float, tail: float = 0.0) -> int:
    """Smallest integer w with P(max(0, v-w) <= c <= v+w) >= eta.

    ``tail`` is the probability mass cut off above the last pmf entry. Windows
    reaching past it are only known up to that mass, so the radius is
    returned only when the lower and upper mass bounds agree on it.
    """
    c_max = len(pmf) - 1
    w = np.arange(max(v, c_max - v) + 2)

    def bounds(x):
        # cdf at x is exact up to c_max and only bracketed beyond it
        exact = np.where(x >= 0, cdf[np.clip(x, 0, c_max)], 0.0)
        return exact, exact + np.where(x > c_max, tail, 0.0)

    hi_lo, hi_up = bounds(v + w)
    lo_lo, lo_up = bounds(v - w - 1)
    mass = hi_lo - lo_up
    upper = hi_up - lo_lo
    ok = np.flatnonzero(mass >= eta)
    maybe = np.flatnonzero(upper >= eta)
    if not ok.size:
        if tail > 0:
            raise TruncatedSupportError(f"truncated pmf too short for risk level {eta}")
        raise ValueError(f"risk level {eta} exceeds the available probability mass {cdf[-1]:.12f}")
    if maybe[0] != ok[0]:
        raise TruncatedSupportError(f"truncated pmf too short for risk level {eta}")
    return int(ok[0])


def cc_cost_matrix(dists, fleet_size: int, risk) -> np.ndarray:
    """K[v, n] = minimal X_n with P((c_n - v)^2 <= X_n) >= eta_n.

    Counts are integers, so the admissible set is an inclusive window of
    integer radius about v and K takes values in {0, 1, 4, 9, ...}.
    Raises TruncatedSupportError when a loosely truncated pmf cannot settle
    some entry.
    """
    dists = list(dists)
    risk = np.broadcast_to(np.asarray(risk, dtype=float), (len(dists),))
    if np.any((risk <= 0) | (risk >= 1)):
        raise ValueError("risk levels must lie in (0, 1)")
    K = np.zeros((fleet_size + 1, len(dists)))
    for n, d in enumerate(dists):
        if isinstance(d, PredictiveCountDist):
            pmf, tail = d.pmf, max(d.tail_mass, 0.0)
        else:
            pmf, tail = np.asarray(d, dtype=float), 0.0
        cdf = np.cumsum(pmf)
        for v in range(fleet_size + 1):
            K[v, n] = _window_radius(pmf, cdf, v, risk[n], tail) ** 2
    return K


def cc_allocation(K: np.ndarray, fleet_size: int | None) -> Allocation:
    """Minimize sum_n K[v_n, n] subject to sum v_n <= fleet_size.

    Exact dynamic program over (node, vehicles used). Ties go to fewer
    vehicles, then to placing vehicles at lower node indices.
    """
    K = np.asarray(K, dtype=float)
    n_rows, n_nodes = K.shape
    if fleet_size is None:
        counts = tuple(int(np.argmin(K[:, n])) for n in range(n_nodes))
        return Allocation(counts, float(sum(K[v, n] for n, v in enumerate(counts))))
    cap = min(fleet_size, n_rows - 1) if n_nodes else 0
    # best[u] = (cost, used, negated counts) over nodes processed so far
    best = {0: (0.0, 0, ())}
    for n in range(n_nodes):
        nxt = {}
        for u, (cost, used, neg) in best.items():
            for v in range(cap - u + 1):
                key = (cost + K[v, n], used + v, neg + (-v,))
                if u + v not in nxt or key < nxt[u + v]:
                    nxt[u + v] = key
        best = nxt
    cost, _, neg = min(best.values())
    return Allocation(tuple(-x for x in neg), float(cost))


def oracle_allocation(true_counts, fleet_size: int | None) -> Allocation:
    if any(c < 0 for c in true_counts):
        raise ValueError("counts must be nonnegative")
    return ev_allocation(true_counts, fleet_size)


def sensing_allocation(fleet_size: int, n_nodes: int = 0) -> Allocation:
    return Allocation((0,) * n_nodes, 0.0)


# Pinned customer fraction standing in for "every pedestrian is a customer".
POINT_FRACTION = BetaBelief(1e6, 1.0)


def nb_parameters(mean: float, std: float) -> tuple[float, float] | None:
    """Moment inversion for numpy's negative binomial; None at the Poisson limit."""
    var = std * std
    if var < mean * (1 - 1e-12):
        raise ValueError(f"std {std} is below the Poisson std {math.sqrt(mean):.4g}")
    if var <= mean * (1 + 1e-12):
        return None
    return mean * mean / (var - mean), mean / var


def matched_node_belief(mean: float, std: float) -> NodeBelief:
    """Gamma-Poisson belief whose count distribution has the given mean and std.

    The mixing Gamma has mean ``mean`` and variance ``std^2 - mean``; at the
    Poisson limit the Gamma collapses to a near point mass.
    """
    excess = max(std * std - mean, mean * 1e-6)
    beta = mean / excess
    return NodeBelief(GammaBelief(mean * beta, beta), POINT_FRACTION)


@dataclass
class ComparisonRow:
    std: float
    planner: str
    mean_cost: float
    mean_cost_sd: float
    max_cost: float
    max_cost_sd: float


def planner_comparison_experiment(
    std_grid=(1.0, 2.0, 3.0, 4.0),
    mean_rate: float = 1.0,
    n_nodes: int = 33,
    eta: float = 0.99,
    trials: int = 1000,
    seed: int = 0,
    t_pred: float = 1.0,
) -> list[ComparisonRow]:
    """Expected-value vs chance-constrained planners on negative binomial arrivals.

    Fleet size is unbounded. Both planners see the true arrival law, so their
    allocations are fixed per std and only the realized costs vary by trial.
    """
    rows = []
    mean = mean_rate * t_pred
    seeds = np.random.SeedSequence(seed).spawn(len(std_grid))
    for std, ss in zip(std_grid, seeds):
        params = nb_parameters(mean, std)
        rng = np.random.default_rng(ss)
        if params is None:
            arrivals = rng.poisson(mean, size=(trials, n_nodes))
        else:
            arrivals = rng.negative_binomial(params[0], params[1], size=(trials, n_nodes))

        belief = matched_node_belief(mean, std)
        ev = ev_allocation([belief.fraction.mean() * belief.rate.mean() * t_pred] * n_nodes, None)
        dist = predictive_pmf(belief, t_pred)
        K = cc_cost_matrix([dist], dist.c_max, eta)
        cc_v = cc_allocation(K, None).counts[0]
        cc = (cc_v,) * n_nodes

        for name, counts in (("ev", ev.counts), ("cc", cc)):
            cost = (arrivals - np.asarray(counts)) ** 2.0
            mean_c = cost.mean(axis=1)
            max_c = cost.max(axis=1)
            rows.append(ComparisonRow(float(std), name, float(mean_c.mean()), float(mean_c.std()),
                                      float(max_c.mean()), float(max_c.std())))
    return rows
