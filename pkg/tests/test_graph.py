import numpy as np
import pytest

import bilayercc as b


def test_design_rate_limits():
    single = b.single_layer_params(3, 10, 100)
    assert b.design_rate_limit(single) == pytest.approx(0.7)
    bilayer = b.BilayerParams(l1=3, r1=10, L=100, w=2, l2=2, r2=10)
    assert b.design_rate_limit(bilayer) == pytest.approx(0.5)


def test_finite_rate_loss_is_exactly_the_boundary_checks():
    params = b.single_layer_params(3, 10, 50, w=2, M=100, kind=b.GENERAL)
    g = b.build_single_layer(params, 123)
    n_interior_equiv = params.checks_per_position(1) * params.L
    boundary = g.num_checks - n_interior_equiv
    assert boundary > 0
    assert b.design_rate(g) == pytest.approx(0.7 - boundary / g.num_vars)


def test_validate_clean_graph():
    params = b.BilayerParams(l1=3, r1=6, L=8, w=2, l2=2, r2=6, M=12, kind=b.GENERAL)
    g = b.build_graph(params, 5)
    assert b.validate(g) == []


def test_validate_flags_duplicate_edge():
    params = b.single_layer_params(3, 6, 6, w=2, M=6, kind=b.GENERAL)
    g = b.build_single_layer(params, 1)
    adj = g.check_adj.copy()
    # force the first check to contain one variable twice
    adj[1] = adj[0]
    tampered = b.TannerGraph(g.params, g.check_time, g.check_layer, adj, g.check_ptr)
    msgs = b.validate(tampered)
    assert any("multi-edge" in m for m in msgs)


def test_validate_flags_layer_mismatch():
    params = b.BilayerParams(l1=3, r1=6, L=6, w=2, l2=2, r2=6, M=6, kind=b.GENERAL)
    g = b.build_graph(params, 2)
    g.edge_layer = g.edge_layer.copy()
    g.edge_layer[0] = 2
    msgs = b.validate(g)
    assert any("layer mismatch" in m for m in msgs)


def test_handshake_identity_per_layer():
    params = b.BilayerParams(l1=4, r1=8, L=10, w=3, l2=2, r2=8, M=16, kind=b.GENERAL)
    g = b.build_graph(params, 42)
    assert g.layer_edge_count(1) == params.num_vars * params.l1
    assert g.layer_edge_count(2) == params.num_vars * params.l2
    assert g.var_degree(1).sum() == g.check_deg[g.check_layer == 1].sum()


def test_layer1_subgraph_identical_edges():
    params = b.BilayerParams(l1=3, r1=10, L=10, w=2, l2=2, r2=10, M=20,
                             kind=b.UNIT_OFFSET)
    single = b.build_single_layer(params.without_layer2(), 9)
    full = b.extend_to_bilayer(single, 2, 10, 9)
    g1 = full.layer1()
    assert np.array_equal(g1.check_adj, single.check_adj)
    assert np.array_equal(g1.check_ptr, single.check_ptr)
    assert b.validate(g1) == []


def test_serialization_roundtrip():
    params = b.BilayerParams(l1=3, r1=6, L=5, w=2, l2=2, r2=6, M=6, kind=b.GENERAL)
    g = b.build_graph(params, 77)
    text = g.to_text()
    head = text.splitlines()[0].split()
    assert head == [str(g.num_vars), str(g.num_checks), "2"]
    g2 = b.graph_from_text(text, params)
    assert g2.to_text() == text
    assert b.validate(g2) == []


def test_params_validation():
    with pytest.raises(ValueError):
        b.BilayerParams(l1=1, r1=6, L=5, w=2)
    with pytest.raises(ValueError):
        b.BilayerParams(l1=3, r1=2, L=5, w=2)
    with pytest.raises(ValueError):
        b.BilayerParams(l1=3, r1=6, L=5, w=1, kind=b.UNIT_OFFSET)
    with pytest.raises(ValueError):
        b.BilayerParams(l1=3, r1=10, L=5, w=2, M=7)  # 21 not divisible by 10
