import numpy as np
import pytest

import bilayercc as b
from bilayercc.density_evolution import STALL, SUCCESS, de_coupled
from oracles import scalar_bisect


def test_step_uncoupled_value():
    # eps=0.5, p=0.5, l=3, r=6: q = 1 - 0.5^5 = 0.96875, next p = 0.5*q^2
    assert b.de_step_uncoupled(0.5, 0.5, 3, 6) == pytest.approx(0.46923828125, abs=1e-12)


def test_step_uncoupled_fixed_point_zero():
    assert b.de_step_uncoupled(0.0, 0.37, 3, 6) == 0.0


def test_step_uncoupled_monotone():
    ps = np.linspace(0.0, 1.0, 21)
    for eps in (0.2, 0.5, 0.8):
        vals = b.de_step_uncoupled(ps, eps, 3, 6)
        assert np.all(np.diff(vals) >= -1e-15)
    for p in (0.1, 0.4, 0.9):
        vals = b.de_step_uncoupled(p, ps, 4, 8)
        assert np.all(np.diff(vals) >= -1e-15)


def test_uncoupled_threshold_3_6():
    def fails(eps):
        p = eps
        for _ in range(50_000):
            pn = b.de_step_uncoupled(p, eps, 3, 6)
            if pn < 1e-12:
                return False
            if abs(pn - p) < 1e-15:
                return True
            p = pn
        return True

    thr = scalar_bisect(fails, tol=1e-6)
    assert thr == pytest.approx(0.4294, abs=5e-4)


def test_bilayer_step_symmetric_layers_collapse():
    p1, p2 = 0.37, 0.37
    for _ in range(50):
        p1, p2 = b.de_step_bilayer_uncoupled(p1, p2, 0.37, 3, 2, 10, 10)
        assert p1 == p2


def test_bilayer_step_l2_zero_reduces_to_single():
    p1, p2 = b.de_step_bilayer_uncoupled(0.3, 0.9, 0.4, 3, 0, 6, 6)
    assert p1 == pytest.approx(b.de_step_uncoupled(0.3, 0.4, 3, 6), abs=1e-15)
    assert p2 == 0.0


def test_bilayer_collapse_trace_100_iterations():
    eps = 0.45
    p1 = p2 = eps
    p = eps
    for _ in range(100):
        p1, p2 = b.de_step_bilayer_uncoupled(p1, p2, eps, 3, 2, 10, 10)
        p = b.de_step_uncoupled(p, eps, 5, 10)
        assert abs(p1 - p) < 1e-12
        assert abs(p2 - p) < 1e-12


def test_coupled_eps_zero_succeeds_immediately():
    params = b.single_layer_params(3, 6, 10, w=2, kind=b.GENERAL)
    prof = de_coupled(params, 0.0)
    assert prof.outcome == SUCCESS
    assert prof.iterations == 1


def test_coupled_L1_w0_matches_uncoupled_trajectory():
    params = b.BilayerParams(l1=3, r1=6, L=1, w=0, kind=b.GENERAL)
    eps = 0.4
    prof = de_coupled(params, eps, max_iter=60, stop_tol=0.0, stall_tol=0.0,
                      record_trace=True)
    p = eps
    for step in prof.trace:
        # recorded profile is the a-posteriori value eps * q^l
        q = 1.0 - (1.0 - p) ** 5
        p_next = eps * q ** 2
        assert step[0] == pytest.approx(eps * q ** 3, abs=1e-14)
        p = p_next


def test_coupled_straddles_known_threshold():
    params = b.single_layer_params(3, 6, 100, w=2, kind=b.GENERAL)
    assert de_coupled(params, 0.45).outcome == SUCCESS
    bad = de_coupled(params, 0.52)
    assert bad.outcome == STALL
    assert bad.p.max() > 0.1


def test_coupled_profile_symmetry():
    params = b.single_layer_params(3, 6, 40, w=2, kind=b.GENERAL)
    prof = de_coupled(params, 0.46, max_iter=50, stop_tol=0.0, stall_tol=0.0)
    assert np.allclose(prof.p, prof.p[::-1], atol=1e-12)
    pu = b.single_layer_params(3, 6, 40, kind=b.UNIT_OFFSET)
    prof = de_coupled(pu, 0.46, max_iter=50, stop_tol=0.0, stall_tol=0.0)
    assert np.allclose(prof.p, prof.p[::-1], atol=1e-12)


def test_threshold_unit_offset_3_10(threshold_cache):
    params = b.single_layer_params(3, 10, 100, kind=b.UNIT_OFFSET)
    res = threshold_cache(params)
    assert res.width <= 1e-4
    assert 0.3 - res.threshold < 0.02
    assert res.threshold < 0.3


def test_threshold_bilayer_equals_combined_single_layer(threshold_cache):
    bilayer = b.BilayerParams(l1=3, r1=10, L=100, w=2, l2=2, r2=10, kind=b.GENERAL)
    single = b.single_layer_params(5, 10, 100, w=2, kind=b.GENERAL)
    t1 = threshold_cache(bilayer)
    t2 = threshold_cache(single)
    assert abs(t1.threshold - t2.threshold) <= 2e-4


def test_coupled_threshold_above_uncoupled(threshold_cache):
    def uncoupled(l, r):
        def fails(eps):
            p = eps
            for _ in range(50_000):
                pn = b.de_step_uncoupled(p, eps, l, r)
                if pn < 1e-12:
                    return False
                if abs(pn - p) < 1e-15:
                    return True
                p = pn
            return True
        return scalar_bisect(fails, tol=1e-5)

    for l, r in ((3, 6), (3, 10)):
        params = b.single_layer_params(l, r, 100, w=2, kind=b.GENERAL)
        assert threshold_cache(params).threshold > uncoupled(l, r)


def test_threshold_rejects_bad_bracket():
    # an eps=1-decodable chain cannot exist, so only the eps=0 side can break:
    # L=1, w=0, l2=0 with stop_tol accepting nothing is not constructible,
    # so instead check the guard on a healthy config returns sane output
    params = b.single_layer_params(3, 6, 20, w=2, kind=b.GENERAL)
    res = b.bp_threshold(params, bracket_tol=5e-3)
    assert 0.0 < res.lo < res.threshold < res.hi < 1.0
    assert res.width <= 5e-3
