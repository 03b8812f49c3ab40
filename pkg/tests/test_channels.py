import numpy as np
import pytest

import bilayercc as b
from bilayercc.channels import ERASED, PlanningError
from oracles import mc_bpsk_mutual_information, q_function


def test_bec_capacity():
    assert b.capacity(b.bec(0.3)) == pytest.approx(0.7)
    assert b.capacity(b.bec(0.0)) == 1.0
    assert b.capacity(b.bec(1.0)) == 0.0


def test_biawgn_capacity_limits():
    # high noise: capacity ~ 1/(2 sigma^2 ln 2) -> 0
    assert b.bpsk_awgn_capacity(100.0) < 1e-4
    assert b.bpsk_awgn_capacity(0.05) > 1.0 - 1e-6
    sigmas = (0.3, 0.5, 0.8, 1.2, 2.0, 5.0)
    caps = [b.bpsk_awgn_capacity(s) for s in sigmas]
    assert all(a > bb for a, bb in zip(caps, caps[1:]))


def test_biawgn_capacity_matches_monte_carlo():
    rng = np.random.default_rng(314)
    for sigma in (0.6, 0.8, 1.0):
        mc = mc_bpsk_mutual_information(sigma, 10_000_000, rng)
        assert b.bpsk_awgn_capacity(sigma) == pytest.approx(mc, abs=1e-3)


def test_snr_db_convention():
    c = b.biawgn(snr_db=6.0)
    assert c.sigma == pytest.approx(10 ** (-0.3))
    assert c.snr_db == pytest.approx(6.0)


def test_rate_plan_reference_point():
    plan = b.rate_plan_capacities(0.7, 0.5, 0.5)
    assert plan.alpha == 0.5 / 0.7
    assert plan.r_df == 0.5
    assert plan.k2 == pytest.approx(0.2)


def test_rate_plan_k2_example():
    plan = b.rate_plan_capacities(0.7, 0.5, 0.5, n1=1000)
    assert plan.k2 == pytest.approx(200.0)
    assert plan.n2 == pytest.approx(400.0)
    assert plan.n1 / (plan.n1 + plan.n2) == pytest.approx(plan.alpha, abs=1e-12)


def test_rate_plan_degenerate_equal_links():
    plan = b.rate_plan_capacities(0.5, 0.5, 0.4)
    assert plan.alpha == 1.0
    assert plan.k2 == 0.0


def test_rate_plan_min_arguments_balance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        c_sd = rng.uniform(0.05, 0.9)
        c_sr = rng.uniform(c_sd, 0.99)
        c_rd = rng.uniform(0.05, 0.99)
        plan = b.rate_plan_capacities(c_sr, c_sd, c_rd)
        through_relay = plan.alpha * c_sr
        direct_plus_side = plan.alpha * c_sd + (1.0 - plan.alpha) * c_rd
        assert abs(through_relay - direct_plus_side) < 1e-12
        assert plan.r_df == pytest.approx(through_relay)


def test_rate_plan_alpha_monotone_in_c_rd():
    last = 0.0
    for c_rd in np.linspace(0.05, 0.95, 19):
        alpha = b.rate_plan_capacities(0.7, 0.5, c_rd).alpha
        assert alpha > last
        last = alpha


def test_rate_plan_infeasible():
    with pytest.raises(PlanningError):
        b.rate_plan_capacities(0.4, 0.5, 0.5)
    with pytest.raises(PlanningError):
        b.rate_plan_capacities(0.7, 0.5, 0.0)


def test_relay_spec_requires_better_relay_link():
    with pytest.raises(ValueError):
        b.RelaySpec(sr=b.bec(0.5), sd=b.bec(0.3), rd=b.bec(0.5))


def test_transmit_bec_limits():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 1000).astype(np.uint8)
    out = b.transmit(bits, b.bec(0.0), np.random.default_rng(1))
    assert np.array_equal(out, bits)
    out = b.transmit(bits, b.bec(1.0), np.random.default_rng(2))
    assert np.all(out == ERASED)


def test_transmit_awgn_sign_error_rate():
    # P(llr sign wrong) = Q(1/sigma) for the all-zero word
    sigma = 0.8
    n = 1_000_000
    llr = b.transmit(np.zeros(n, np.uint8), b.biawgn(sigma=sigma),
                     np.random.default_rng(42))
    rate = float((llr < 0).mean())
    p = q_function(1.0 / sigma)
    assert abs(rate - p) < 3 * np.sqrt(p * (1 - p) / n)
