import numpy as np
import pytest

import bilayercc as b
from bilayercc.relaysim import ERASE, _sweep_graph
from bilayercc.rng import as_seed


@pytest.fixture(scope="module")
def relay_graph():
    params = b.BilayerParams(l1=3, r1=10, L=50, w=2, l2=2, r2=10, M=500,
                             kind=b.UNIT_OFFSET)
    return b.build_graph(params, 21)


def test_run_trial_noiseless(relay_graph):
    spec = b.RelaySpec(sr=b.bec(0.0), sd=b.bec(1e-9), rd=b.bec(0.0))
    out = b.run_trial(spec, relay_graph, 1)
    assert out.relay.success and out.destination.success
    assert out.relay_bit_errors == 0 and out.dest_bit_errors == 0
    assert not out.relay_failed
    assert out.n1 == relay_graph.num_vars


def test_run_trial_relay_failure_flagged(relay_graph):
    # eps_sr far above the layer-1 threshold (~0.29)
    spec = b.RelaySpec(sr=b.bec(0.45), sd=b.bec(0.5), rd=b.bec(0.0))
    failed = sum(b.run_trial(spec, relay_graph, b.Seed(5).child(t)).relay_failed
                 for t in range(100))
    assert failed >= 99


def test_run_trial_success_below_thresholds(relay_graph):
    # both links comfortably below the coupled thresholds (~0.29 and ~0.49)
    spec = b.RelaySpec(sr=b.bec(0.25), sd=b.bec(0.42), rd=b.bec(0.5))
    ok = 0
    for t in range(100):
        out = b.run_trial(spec, relay_graph, b.Seed(6).child(t))
        ok += out.relay.success and out.destination.success
        assert out.n2 == pytest.approx(len(relay_graph.layer2_checks) / 0.5)
    assert ok >= 99


def test_run_trial_erase_policy(relay_graph):
    spec = b.RelaySpec(sr=b.bec(0.45), sd=b.bec(0.5), rd=b.bec(0.0))
    out = b.run_trial(spec, relay_graph, 3, failure_policy=ERASE)
    assert out.relay_failed
    assert not out.destination.success
    assert out.dest_bit_errors == relay_graph.num_vars


def test_run_trial_with_encoder_round_trip():
    params = b.BilayerParams(l1=3, r1=10, L=20, w=2, l2=2, r2=10, M=50,
                             kind=b.UNIT_OFFSET)
    g = b.build_graph(params, 11)
    spec = b.RelaySpec(sr=b.bec(0.1), sd=b.bec(0.3), rd=b.bec(0.5))
    for t in range(20):
        out = b.run_trial(spec, g, b.Seed(7).child(t), use_encoder=True)
        if out.relay.success:
            assert out.relay_bit_errors == 0
        if out.relay.success and out.destination.success:
            assert out.dest_bit_errors == 0


def test_sweep_zero_noise_point():
    params = b.BilayerParams(l1=3, r1=10, L=10, w=2, l2=2, r2=10, M=20,
                             kind=b.UNIT_OFFSET)
    cfg = b.SweepConfig(params=params, channel="bec", grid=(0.0,), trials=20,
                        target_block_errors=5, seed=1)
    (res,) = b.run_sweep(cfg)
    assert res.trials == 20
    assert res.bit_errors == 0 and res.ber == 0.0
    assert res.block_errors == 0 and res.bler == 0.0


def test_sweep_deterministic_across_workers():
    params = b.BilayerParams(l1=3, r1=10, L=10, w=2, l2=2, r2=10, M=20,
                             kind=b.UNIT_OFFSET)
    base = dict(params=params, channel="bec", grid=(0.35, 0.45), trials=40,
                target_block_errors=10, seed=42)
    r1 = b.run_sweep(b.SweepConfig(workers=1, **base))
    r2 = b.run_sweep(b.SweepConfig(workers=2, **base))
    assert r1 == r2


def test_sweep_stops_exactly_at_target():
    params = b.BilayerParams(l1=3, r1=10, L=10, w=2, l2=2, r2=10, M=20,
                             kind=b.UNIT_OFFSET)
    cfg = b.SweepConfig(params=params, channel="bec", grid=(0.9,), trials=500,
                        target_block_errors=7, seed=3)
    (res,) = b.run_sweep(cfg)
    assert res.block_errors == 7
    assert res.trials == 7  # every trial fails at eps = 0.9


def test_sweep_seed_blocks_agree_within_ci():
    params = b.BilayerParams(l1=3, r1=10, L=20, w=2, l2=2, r2=10, M=50,
                             kind=b.UNIT_OFFSET)
    base = dict(params=params, channel="bec", grid=(0.44,), trials=150,
                target_block_errors=1000)
    (ra,) = b.run_sweep(b.SweepConfig(seed=101, **base))
    (rb,) = b.run_sweep(b.SweepConfig(seed=202, **base))
    assert abs(ra.bler - rb.bler) <= ra.ci95 + rb.ci95


def test_compare_same_graph_identical_curves(relay_graph):
    seed = as_seed(77)
    a = _sweep_graph(relay_graph, "bec", (0.3, 0.45), 30, 10, seed, 1, 200)
    bb = _sweep_graph(relay_graph, "bec", (0.3, 0.45), 30, 10, seed, 1, 200)
    assert a == bb


def test_compare_conv_vs_block_structure():
    conv = b.BilayerParams(l1=3, r1=10, L=10, w=2, l2=2, r2=10, M=20,
                           kind=b.UNIT_OFFSET)
    cc = b.CompareConfig(conv=conv, grid=(2.0,), trials=10,
                         target_block_errors=5, seed=9)
    rows = b.compare_conv_vs_block(cc)
    arms = {(arm, side) for arm, side, _ in rows}
    assert arms == {("conv", "relay"), ("conv", "destination"),
                    ("block", "relay"), ("block", "destination")}
    assert b.block_length_rule(conv) == 60
    for _, _, results in rows:
        assert len(results) == 1
        assert results[0].trials >= 1
