import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modhail.belief import (
    FRACTION_PRIOR, LINK_PRIOR, BeliefStore, BetaBelief, GammaBelief, HypergeometricConvergenceError,
    NodeBelief, beta_update, expected_customers, gamma_update, hyp2f1_nonpositive_z, mc_oracle_pmf,
    node_rate_from_links, predictive_cdf, predictive_pmf,
)

pos = st.floats(0.05, 20.0)
LN2_NODE = NodeBelief(GammaBelief(1, 1), BetaBelief(1, 1))


# ----- oracle first: the Monte Carlo sampler itself -----
def test_mc_oracle_ln2_case():
    pmf = mc_oracle_pmf(LN2_NODE, 1.0, 10_000_000, seed=11)
    p = math.log(2)
    sigma = math.sqrt(p * (1 - p) / 10_000_000)
    assert abs(pmf[0] - p) < 3 * sigma
    assert abs(pmf[0] - 0.6931) < 0.0005


def test_mc_oracle_is_seeded():
    a = mc_oracle_pmf(LN2_NODE, 1.0, 10_000, seed=3)
    b = mc_oracle_pmf(LN2_NODE, 1.0, 10_000, seed=3)
    assert np.array_equal(a, b)
    assert mc_oracle_pmf(LN2_NODE, 1e-12, 10_000, seed=3)[0] == 1.0


# ----- conjugate updates -----
def test_gamma_update_examples():
    assert gamma_update(GammaBelief(1, 1), 3, 2) == GammaBelief(4, 3)
    g = GammaBelief(2.5, 1.5)
    assert gamma_update(g, 0, 1e-9).mean() == pytest.approx(g.mean(), rel=1e-9)
    assert gamma_update(LINK_PRIOR, 100, 100).mean() == pytest.approx(1.0)
    assert LINK_PRIOR == GammaBelief(0.1, 0.1)
    with pytest.raises(ValueError):
        gamma_update(g, 1, 0.0)
    with pytest.raises(ValueError):
        gamma_update(g, -1, 1.0)


def test_beta_update_examples():
    b = beta_update(BetaBelief(1, 1), 3, 1)
    assert b == BetaBelief(4, 2) and b.mean() == pytest.approx(2 / 3)
    assert beta_update(FRACTION_PRIOR, 0, 0) == FRACTION_PRIOR
    assert beta_update(FRACTION_PRIOR, 0, 1000).mean() == pytest.approx(1 / 1002)


@pytest.mark.parametrize("cls, args", [(GammaBelief, (0, 1)), (GammaBelief, (1, -1)), (BetaBelief, (1, 0))])
def test_beliefs_reject_nonpositive(cls, args):
    with pytest.raises(ValueError):
        cls(*args)


@given(a=pos, b=pos, m1=st.integers(0, 50), m2=st.integers(0, 50), t1=st.integers(1, 100), t2=st.integers(1, 100))
def test_conjugacy_composes_exactly(a, b, m1, m2, t1, t2):
    # whole-minute windows keep every sum exactly representable
    g = GammaBelief(float(round(a)) + 1.0, float(round(b)) + 1.0)
    assert gamma_update(gamma_update(g, m1, t1), m2, t2) == gamma_update(g, m1 + m2, t1 + t2)
    f = BetaBelief(float(round(a)) + 1.0, float(round(b)) + 1.0)
    assert beta_update(beta_update(f, m1, m2), m2, m1) == beta_update(f, m1 + m2, m2 + m1)


@given(a=pos, b=pos, m1=st.integers(0, 50), m2=st.integers(0, 50), t1=pos, t2=pos)
def test_conjugacy_composes(a, b, m1, m2, t1, t2):
    one = gamma_update(gamma_update(GammaBelief(a, b), m1, t1), m2, t2)
    two = gamma_update(GammaBelief(a, b), m1 + m2, t1 + t2)
    assert (one.alpha, one.beta) == pytest.approx((two.alpha, two.beta), rel=1e-15)


# ----- Welch-Satterthwaite -----
def test_node_rate_examples():
    assert node_rate_from_links([GammaBelief(2, 1), GammaBelief(2, 1)]) == GammaBelief(4, 1)
    g = node_rate_from_links([GammaBelief(1, 1), GammaBelief(1, 2)])
    assert (g.alpha, g.beta) == pytest.approx((1.8, 1.2))
    single = GammaBelief(0.3, 0.7)
    assert node_rate_from_links([single]) == single
    with pytest.raises(ValueError):
        node_rate_from_links([])


@given(st.lists(st.tuples(pos, pos), min_size=1, max_size=6))
def test_node_rate_matches_moments(params):
    gs = [GammaBelief(a, b) for a, b in params]
    g = node_rate_from_links(gs)
    assert g.mean() == pytest.approx(sum(x.mean() for x in gs), rel=1e-12)
    assert g.variance() == pytest.approx(sum(x.variance() for x in gs), rel=1e-12)


@given(st.lists(pos, min_size=1, max_size=6), pos)
def test_node_rate_exact_for_shared_rate(shapes, beta):
    g = node_rate_from_links([GammaBelief(a, beta) for a in shapes])
    assert g.alpha == pytest.approx(sum(shapes), rel=1e-12)
    assert g.beta == pytest.approx(beta, rel=1e-12)


# ----- 2F1 -----
def test_hyp2f1_examples():
    assert hyp2f1_nonpositive_z(0.7, 3.1, 2.2, 0.0) == 1.0
    assert hyp2f1_nonpositive_z(2, 5, 5, -1) == pytest.approx(0.25, rel=1e-12)
    assert hyp2f1_nonpositive_z(1, 1, 2, -1) == pytest.approx(math.log(2), rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1, 2, 7])
@pytest.mark.parametrize("z", [0, -0.5, -1, -10])
def test_hyp2f1_power_identity(a, z):
    for b in (0.3, 1.0, 4.5):
        assert hyp2f1_nonpositive_z(a, b, b, z) == pytest.approx((1 - z) ** (-a), rel=1e-10)


@given(z=st.floats(-50.0, -1e-6))
def test_hyp2f1_log_identity(z):
    # 2F1(1, 1; 2; z) = -ln(1 - z) / z
    assert hyp2f1_nonpositive_z(1, 1, 2, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-10)


@given(a=st.floats(0.05, 30), b=st.floats(0.05, 30), z=st.floats(-40, 0))
def test_hyp2f1_symmetric_in_a_b(a, b, z):
    c = max(a, b) + 0.5
    assert hyp2f1_nonpositive_z(a, b, c, z) == pytest.approx(hyp2f1_nonpositive_z(b, a, c, z), rel=1e-10)


@given(a=st.floats(0.05, 20), b=st.floats(1, 15), gap=st.floats(1, 15), z=st.floats(-30, -0.01))
def test_hyp2f1_against_euler_integral(a, b, gap, z):
    # For c - b >= 1 and b >= 1 the Euler integrand is smooth and bounded,
    # so adaptive quadrature is an independent high-accuracy reference.
    from scipy.integrate import quad
    from scipy.special import beta as B
    c = b + gap
    val, _ = quad(lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - z * t) ** (-a), 0, 1,
                  epsabs=0, epsrel=1e-13, limit=400)
    assert hyp2f1_nonpositive_z(a, b, c, z) == pytest.approx(val / B(b, c - b), rel=1e-9)


def test_hyp2f1_rejects_bad_domain():
    with pytest.raises(ValueError):
        hyp2f1_nonpositive_z(1, 1, 2, 0.5)
    with pytest.raises(ValueError):
        hyp2f1_nonpositive_z(1, 1, -2, -0.5)


def test_hyp2f1_refuses_cancelling_series():
    # a, b > c makes the transformed series alternate with heavy cancellation.
    with pytest.raises(HypergeometricConvergenceError):
        hyp2f1_nonpositive_z(22.2, 23.5, 2.88, -7.76)


# ----- predictive distribution -----
def test_pmf_ln2_case_against_oracle():
    d = predictive_pmf(LN2_NODE, 1.0)
    assert d.pmf[0] == pytest.approx(math.log(2), rel=1e-12)
    assert predictive_cdf(d, 0) == pytest.approx(0.6931, abs=5e-5)
    mc = mc_oracle_pmf(LN2_NODE, 1.0, 1_000_000, seed=5)
    n = min(len(mc), len(d.pmf))
    assert np.abs(d.pmf[:n] - mc[:n]).max() < 0.003


def test_pmf_vanishing_horizon():
    d = predictive_pmf(LN2_NODE, 1e-12)
    assert d.c_max == 0 and d.pmf[0] == pytest.approx(1.0, abs=1e-9)


def test_pmf_rejects_nonpositive_horizon():
    with pytest.raises(ValueError):
        predictive_pmf(LN2_NODE, 0.0)


def test_pmf_cap_signals_divergence():
    with pytest.raises(ArithmeticError):
        predictive_pmf(NodeBelief(GammaBelief(1e-3, 1e-3), BetaBelief(1, 1)), 5.0, c_cap=200)


def test_cdf_edges():
    d = predictive_pmf(NodeBelief(GammaBelief(3, 2), BetaBelief(2, 1)), 5.0)
    assert predictive_cdf(d, -0.5) == 0.0
    assert predictive_cdf(d, d.c_max) >= 1 - 1e-9
    assert predictive_cdf(d, 2.7) == pytest.approx(d.pmf[:3].sum())
    assert d.cdf(1e9) >= 1 - 1e-9


def test_expected_customers_examples():
    assert expected_customers(NodeBelief(GammaBelief(2, 1), BetaBelief(1, 1)), 5) == pytest.approx(5.0)
    assert expected_customers(NodeBelief(GammaBelief(2, 1), BetaBelief(1, 1e12)), 5) < 1e-10


node_beliefs = st.builds(
    lambda al, be, a, b: NodeBelief(GammaBelief(al, be), BetaBelief(a, b)),
    st.floats(0.05, 30), st.floats(0.1, 10), st.floats(0.2, 30), st.floats(0.2, 30),
)


@settings(max_examples=40, deadline=None)
@given(node=node_beliefs, t=st.floats(0.1, 10))
def test_pmf_normalized_and_minimally_truncated(node, t):
    d = predictive_pmf(node, t)
    assert np.all(d.pmf >= 0)
    assert 0 <= d.tail_mass <= 1e-9 + 1e-12
    assert d.pmf.sum() + d.tail_mass == pytest.approx(1.0, abs=1e-9)
    assert d.pmf[:-1].sum() < 1 - 1e-9 or d.c_max == 0


@settings(max_examples=40, deadline=None)
@given(node=node_beliefs, t=st.floats(0.1, 10))
def test_pmf_mean_and_overdispersion(node, t):
    # A tighter truncation keeps the cut tail from biasing the first moment.
    d = predictive_pmf(node, t, tail_tol=1e-11)
    assert d.mean() == pytest.approx(expected_customers(node, t), rel=1e-6)
    assert d.variance() >= d.mean() * (1 - 1e-6)


def test_belief_store_document_round_trip(small_graph):
    s = BeliefStore(small_graph.n_links, small_graph.n_nodes)
    s.observe_link(3, 4, 2.5)
    s.observe_node(1, 2, 7)
    again = BeliefStore.from_document(s.to_document())
    assert again.links == s.links and again.fractions == s.fractions
    rates = s.estimated_customer_rates(small_graph)
    for n in range(small_graph.n_nodes):
        b = s.node_belief(small_graph, n)
        assert rates[n] == pytest.approx(b.fraction.mean() * b.rate.mean())
