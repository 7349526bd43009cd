"""Conjugate beliefs over arrival rates and customer fractions.

Gamma beliefs use the (shape, rate) parameterization, so observing ``m``
arrivals over ``t`` time units maps ``(alpha, beta) -> (alpha + m, beta + t)``.
All rates are per minute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class GammaBelief:
    alpha: float
    beta: float  # rate, 1/minute

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Gamma hyperparameters must be positive, got {self}")

    def mean(self) -> float:
        return self.alpha / self.beta

    def variance(self) -> float:
        return self.alpha / self.beta**2


@dataclass(frozen=True)
class BetaBelief:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"Beta hyperparameters must be positive, got {self}")

    def mean(self) -> float:
        return self.a / (self.a + self.b)


@dataclass(frozen=True)
class NodeBelief:
    rate: GammaBelief
    fraction: BetaBelief


@dataclass(frozen=True, eq=False)
class PredictiveCountDist:
    pmf: np.ndarray
    t_pred: float
    tail_mass: float

    @property
    def c_max(self) -> int:
        return len(self.pmf) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    def variance(self) -> float:
        c = np.arange(len(self.pmf))
        m = self.mean()
        return float(np.dot((c - m) ** 2, self.pmf))

    def cdf(self, x: float) -> float:
        return predictive_cdf(self, x)


LINK_PRIOR = GammaBelief(0.1, 0.1)
FRACTION_PRIOR = BetaBelief(1.0, 1.0)


def gamma_update(belief: GammaBelief, count: int, duration: float) -> GammaBelief:
    if not duration > 0:
        raise ValueError("observation duration must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    return GammaBelief(belief.alpha + count, belief.beta + duration)


def beta_update(belief: BetaBelief, customers: int, non_customers: int) -> BetaBelief:
    if customers < 0 or non_customers < 0:
        raise ValueError("counts must be nonnegative")
    return BetaBelief(belief.a + customers, belief.b + non_customers)


def node_rate_from_links(link_beliefs) -> GammaBelief:
    """Welch-Satterthwaite: one Gamma matching the mean and variance of a sum."""
    link_beliefs = list(link_beliefs)
    if not link_beliefs:
        raise ValueError("need at least one link belief")
    if len(link_beliefs) == 1:
        return link_beliefs[0]
    m = sum(g.alpha / g.beta for g in link_beliefs)
    v = sum(g.alpha / g.beta**2 for g in link_beliefs)
    return GammaBelief(m * m / v, m / v)


class HypergeometricConvergenceError(ArithmeticError):
    pass


def _log_hyp2f1_series(a, b, c, w, tol=1e-17, max_terms=200_000, block=16, max_block=1024,
                       rel_accuracy=1e-10, return_sign=False):
    """log |sum_k (a)_k (b)_k / ((c)_k k!) w^k for 0 <= w < 1, positive a, c.

    Vectorized over broadcastable array arguments, and over blocks of k: term
    magnitudes come from cumulative sums of log term ratios, so a block of
    terms costs a handful of numpy calls. With b >= 0 every term is
    nonnegative and there is no cancellation; b < 0 is allowed but then the
    series may alternate; if cancellation would cost more than
    ``rel_accuracy`` the call raises instead of returning a degraded value.
    """
    a, b, c, w = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c, w)))
    shape = a.shape
    a, b, c, w = (np.atleast_1d(x).ravel()[:, None] for x in (a, b, c, w))
    if not (w > 0).any():
        return (np.zeros(shape), np.ones(shape)) if return_sign else np.zeros(shape)
    total = np.ones(a.shape[0])
    biggest = np.ones(a.shape[0])
    log_term = np.zeros(a.shape[0])
    sign = np.ones(a.shape[0])
    k = 0
    with np.errstate(divide="ignore"):
        while True:
            j = np.arange(k, k + block, dtype=float)[None, :]
            ratio = (a + j) * (b + j) / ((c + j) * (j + 1.0)) * w
            logs = log_term[:, None] + np.cumsum(np.log(np.abs(ratio)), axis=1)
            signs = sign[:, None] * np.cumprod(np.sign(ratio), axis=1)
            terms = signs * np.exp(logs)
            total += terms.sum(axis=1)
            biggest = np.maximum(biggest, np.abs(terms).max(axis=1))
            log_term, sign = logs[:, -1], signs[:, -1]
            k += block
            # Remaining tail is bounded by a geometric series once ratio < 1.
            last = np.abs(terms[:, -1])
            rmax = np.maximum(np.abs(ratio[:, -1]), w[:, 0])
            with np.errstate(invalid="ignore"):
                tail = last * rmax / (1.0 - rmax)
            if np.all((last == 0) | ((rmax < 1) & (tail <= tol * np.abs(total)))):
                break
            if k >= max_terms:
                raise HypergeometricConvergenceError(f"2F1 series did not converge in {max_terms} terms")
            block = min(2 * block, max_block)
    # Alternating sums lose about log10(biggest / |total|) digits.
    lost = biggest * np.finfo(float).eps * 16
    if np.any(~(lost <= rel_accuracy * np.abs(total))):
        raise HypergeometricConvergenceError("2F1 series cancels beyond the requested accuracy")
    out = np.log(np.abs(total)).reshape(shape)
    return (out, np.sign(total).reshape(shape)) if return_sign else out


def hyp2f1_nonpositive_z(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b; c; z) for z <= 0.

    Uses the Pfaff transformation
    2F1(a, b; c; z) = (1 - z)^(-a) 2F1(a, c - b; c; z / (z - 1)),
    which maps z in (-inf, 0] onto [0, 1) where the series converges.
    Accepts scalars or arrays. When min(a, b) <= c all series terms are
    nonnegative; otherwise the series alternates and may raise
    HypergeometricConvergenceError rather than lose accuracy.
    """
    a, b, c, z = (np.asarray(x, dtype=float) for x in (a, b, c, z))
    if np.any(c <= 0):
        raise ValueError("c must be positive")
    if np.any(z > 0):
        raise ValueError("z must be nonpositive")
    # 2F1 is symmetric in a and b; putting the smaller one in the second
    # slot keeps c - b as large as possible, so the series alternates less.
    a, b = np.maximum(a, b), np.minimum(a, b)
    w = z / (z - 1.0)
    log_f, sign = _log_hyp2f1_series(a, c - b, c, w, return_sign=True)
    out = sign * np.exp(-a * np.log1p(-z) + log_f)
    return float(out) if out.ndim == 0 else out


def _log_pmf_chunk(c, alpha, beta, a, b, t_pred):
    x = t_pred / beta
    # 2F1 is symmetric in its first two arguments; ordering (alpha+c, a+c)
    # makes the Pfaff partner c - b collapse to the constant b.
    log_f = _log_hyp2f1_series(alpha + c, b, a + b + c, x / (1.0 + x))
    return (
        gammaln(alpha + c) - gammaln(c + 1.0) - gammaln(alpha)
        + gammaln(a + c) - gammaln(a)
        + gammaln(a + b) - gammaln(a + b + c)
        + c * math.log(x) - (alpha + c) * math.log1p(x)
        + log_f
    )


def predictive_pmf(
    node: NodeBelief, t_pred: float, tail_tol: float = 1e-9, c_cap: int = 10_000
) -> PredictiveCountDist:
    """Predictive distribution of customer arrivals over ``t_pred`` minutes.

    Marginalizes the pedestrian rate (Gamma) and the customer fraction (Beta)
    out of a Poisson count. Truncated at the smallest count whose cumulative
    mass reaches ``1 - tail_tol``.
    """
    if not t_pred > 0:
        raise ValueError("t_pred must be positive")
    alpha, beta = node.rate.alpha, node.rate.beta
    a, b = node.fraction.a, node.fraction.b
    mean = a / (a + b) * alpha / beta * t_pred
    # Rough spread of the mixed count, used only to size chunks.
    sd = math.sqrt(mean + (alpha / beta**2) * t_pred**2)
    chunk = int(min(c_cap + 1, 256, max(16, mean + 12 * sd + 16)))
    parts = []
    acc = 0.0
    start = 0
    while True:
        stop = min(start + chunk, c_cap + 1)
        c = np.arange(start, stop, dtype=float)
        p = np.exp(_log_pmf_chunk(c, alpha, beta, a, b, t_pred))
        cum = acc + np.cumsum(p)
        hit = np.flatnonzero(cum >= 1.0 - tail_tol)
        if hit.size:
            parts.append(p[: hit[0] + 1])
            pmf = np.concatenate(parts)
            return PredictiveCountDist(pmf, t_pred, 1.0 - float(pmf.sum()))
        parts.append(p)
        acc = float(cum[-1])
        start = stop
        if start > c_cap:
            raise ArithmeticError(
                f"predictive pmf mass {acc:.12f} short of 1 - {tail_tol} at cap {c_cap}"
            )
        chunk *= 2


def predictive_cdf(dist: PredictiveCountDist, x: float) -> float:
    if x < 0:
        return 0.0
    k = int(math.floor(x))
    return float(dist.pmf[: k + 1].sum())


def expected_customers(node: NodeBelief, t_pred: float) -> float:
    # E[p] E[lambda] is a rate; the count over the horizon scales with t_pred.
    return node.fraction.mean() * node.rate.mean() * t_pred


def mc_oracle_pmf(node: NodeBelief, t_pred: float, samples: int, seed: int) -> np.ndarray:
    """Empirical pmf from sampling rate, fraction, then the Poisson count."""
    rng = np.random.default_rng(seed)
    lam = rng.gamma(node.rate.alpha, 1.0 / node.rate.beta, samples)
    p = rng.beta(node.fraction.a, node.fraction.b, samples)
    counts = rng.poisson(p * lam * t_pred)
    return np.bincount(counts) / samples


class BeliefStore:
    """Per-link rate beliefs and per-node customer-fraction beliefs for one run."""

    def __init__(self, n_links: int, n_nodes: int, link_prior=LINK_PRIOR, fraction_prior=FRACTION_PRIOR):
        self.links = [link_prior] * n_links
        self.fractions = [fraction_prior] * n_nodes

    def observe_link(self, link: int, count: int, duration_min: float) -> None:
        self.links[link] = gamma_update(self.links[link], count, duration_min)

    def observe_node(self, node: int, customers: int, non_customers: int) -> None:
        self.fractions[node] = beta_update(self.fractions[node], customers, non_customers)

    def node_rate(self, graph, node: int) -> GammaBelief:
        return node_rate_from_links(self.links[l] for l in graph.out_links[node])

    def node_belief(self, graph, node: int) -> NodeBelief:
        return NodeBelief(self.node_rate(graph, node), self.fractions[node])

    def estimated_customer_rates(self, graph) -> np.ndarray:
        # Welch-Satterthwaite keeps the mean, so the node rate mean is a plain sum.
        means = np.array([g.alpha / g.beta for g in self.links])
        out = np.array([means[list(ls)].sum() for ls in graph.out_links])
        frac = np.array([f.a / (f.a + f.b) for f in self.fractions])
        return frac * out

    def to_document(self) -> dict:
        return {
            "links": [{"alpha": g.alpha, "beta": g.beta} for g in self.links],
            "nodes": [{"a": f.a, "b": f.b} for f in self.fractions],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "BeliefStore":
        store = cls(0, 0)
        store.links = [GammaBelief(float(d["alpha"]), float(d["beta"])) for d in doc["links"]]
        store.fractions = [BetaBelief(float(d["a"]), float(d["b"])) for d in doc["nodes"]]
        return store
