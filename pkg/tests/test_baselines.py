import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import waterfill_bisection
from jmbeam.baselines import jmb_zf_svd_wf, water_fill, zf_wf
from jmbeam.channel import CsitConfig, make_draw, substream
from jmbeam.errors import RankDeficient
from jmbeam.linalg import zf_directions
from jmbeam.receivers import link_terms, precoder_power, sum_rate


# ---------------------------------------------------------------------------
# water_fill


def test_waterfill_equal_gains():
    r = water_fill(np.array([2.0, 2.0, 2.0]), 6.0)
    assert np.allclose(r.powers, 2.0, rtol=1e-12)


def test_waterfill_low_budget_picks_best_channel():
    r = water_fill(np.array([1.0, 100.0]), 0.01)
    assert r.powers[0] == 0.0
    assert r.powers[1] == pytest.approx(0.01, rel=1e-12)


def test_waterfill_matches_bisection_oracle():
    r = water_fill(np.array([1.0, 4.0]), 2.0)
    want = waterfill_bisection(np.array([1.0, 4.0]), 2.0)
    assert np.allclose(r.powers, want, atol=1e-10)


def test_waterfill_oracle_sweep():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(1, 6))
        gains = rng.uniform(0.01, 50.0, size=k)
        budget = float(rng.uniform(0.0, 20.0))
        r = water_fill(gains, budget)
        want = waterfill_bisection(gains, budget)
        assert np.allclose(r.powers, want, atol=1e-9)


def test_waterfill_kkt_exact():
    rng = np.random.default_rng(1)
    for _ in range(300):
        k = int(rng.integers(1, 7))
        gains = rng.uniform(1e-3, 100.0, size=k)
        budget = float(rng.uniform(1e-6, 100.0))
        r = water_fill(gains, budget)
        assert np.all(r.powers >= 0)
        assert np.sum(r.powers) == pytest.approx(budget, abs=1e-10 * max(1, budget))
        for g, q in zip(gains, r.powers):
            if q > 0:
                assert 1.0 / g + q == pytest.approx(r.water_level, abs=1e-10 * r.water_level)
            else:
                assert 1.0 / g >= r.water_level - 1e-10 * r.water_level


@given(
    st.lists(st.floats(0.01, 100.0), min_size=1, max_size=6),
    st.floats(0.0, 50.0),
)
@settings(max_examples=200, deadline=None)
def test_waterfill_kkt_property(gains, budget):
    gains = np.array(gains)
    r = water_fill(gains, budget)
    assert np.all(r.powers >= 0)
    assert abs(np.sum(r.powers) - budget) <= 1e-9 * max(1.0, budget)
    if budget > 0:
        lvl = r.water_level
        for g, q in zip(gains, r.powers):
            if q > 1e-12:
                assert abs(1.0 / g + q - lvl) <= 1e-9 * max(1.0, lvl)
            else:
                assert 1.0 / g >= lvl - 1e-9 * max(1.0, lvl)


def test_waterfill_zero_budget():
    r = water_fill(np.array([1.0, 2.0]), 0.0)
    assert np.all(r.powers == 0)


def test_waterfill_validation():
    with pytest.raises(ValueError):
        water_fill(np.array([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        water_fill(np.array([1.0]), -0.5)


def test_waterfill_beats_alternatives():
    # optimality spot check: no feasible reallocation does better
    rng = np.random.default_rng(2)
    gains = np.array([0.3, 2.0, 9.0])
    budget = 4.0
    r = water_fill(gains, budget)
    best = np.sum(np.log2(1 + gains * r.powers))
    for _ in range(500):
        q = rng.dirichlet(np.ones(3)) * budget
        assert np.sum(np.log2(1 + gains * q)) <= best + 1e-9


# ---------------------------------------------------------------------------
# zf_wf


def test_zf_wf_identity_channel():
    p = zf_wf(np.eye(2, dtype=complex), 8.0, 1.0)
    assert np.all(p[:, 0] == 0)
    assert np.allclose(np.abs(p[:, 1]), [2.0, 0.0], atol=1e-12)
    assert np.allclose(np.abs(p[:, 2]), [0.0, 2.0], atol=1e-12)


def test_zf_wf_single_user_matched():
    rng = np.random.default_rng(3)
    h = (rng.standard_normal((3, 1)) + 1j * rng.standard_normal((3, 1)))
    p = zf_wf(h, 5.0, 1.0)
    # zero forcing with one user is matched filtering at full power
    d = p[:, 1] / np.linalg.norm(p[:, 1])
    hd = h[:, 0] / np.linalg.norm(h[:, 0])
    assert abs(d.conj() @ hd) == pytest.approx(1.0, abs=1e-10)
    assert precoder_power(p) == pytest.approx(5.0, rel=1e-12)


def test_zf_wf_nominal_rate_identity():
    # evaluated on the estimate itself there is no interference, so the
    # sum rate is exactly the water-filled nominal value
    rng = np.random.default_rng(4)
    for _ in range(20):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        p = zf_wf(h, 10.0, 1.0)
        dirs = zf_directions(h)
        gains = np.array(
            [abs(h[:, k].conj() @ dirs[:, k]) ** 2 for k in range(2)]
        )
        q = water_fill(gains, 10.0)
        want = float(np.sum(np.log2(1 + gains * q.powers)))
        assert sum_rate(h, p, 1.0) == pytest.approx(want, abs=1e-10)


def test_zf_wf_residual_interference_on_true_channel():
    cfg = CsitConfig(n_t=2, k=2, alpha=0.6, p_t=100.0)
    hits = 0
    for seed in range(20):
        draw = make_draw(substream(seed, 0), cfg)
        p = zf_wf(draw.h_est, cfg.p_t, 1.0)
        for u in range(2):
            lt = link_terms(draw.h_true[:, u], p, 1.0, u)
            # e_p is cross interference plus noise; strictly above the
            # noise floor whenever the estimate is imperfect
            if lt.e_p > 1.0 + 1e-12:
                hits += 1
    assert hits == 40  # almost surely positive, every draw here


def test_zf_wf_rank_deficient():
    with pytest.raises(RankDeficient):
        zf_wf(np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex), 4.0, 1.0)


# ---------------------------------------------------------------------------
# jmb_zf_svd_wf


def test_jmb_zf_svd_alpha_one_equals_zf_wf():
    rng = np.random.default_rng(5)
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = jmb_zf_svd_wf(h, 10.0, 1.0, 1.0)
    b = zf_wf(h, 10.0, 1.0)
    assert np.allclose(a, b, atol=1e-12)


def test_jmb_zf_svd_alpha_zero_split():
    rng = np.random.default_rng(6)
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p = jmb_zf_svd_wf(h, 10.0, 0.0, 1.0)
    # private budget p_t**0 = 1, the rest rides the common column
    assert np.linalg.norm(p[:, 0]) ** 2 == pytest.approx(9.0, rel=1e-10)
    assert np.linalg.norm(p[:, 1:]) ** 2 == pytest.approx(1.0, rel=1e-10)


def test_jmb_zf_svd_power_accounting():
    rng = np.random.default_rng(7)
    for _ in range(50):
        h = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        p_t = float(rng.uniform(0.5, 300.0))
        alpha = float(rng.uniform(0.0, 1.0))
        p = jmb_zf_svd_wf(h, p_t, alpha, 1.0)
        assert precoder_power(p) == pytest.approx(p_t, rel=1e-10)


def test_jmb_zf_svd_common_direction():
    rng = np.random.default_rng(8)
    h = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    p = jmb_zf_svd_wf(h, 100.0, 0.6, 1.0)
    u0 = np.linalg.svd(h)[0][:, 0]
    d = p[:, 0] / np.linalg.norm(p[:, 0])
    assert abs(d.conj() @ u0) == pytest.approx(1.0, abs=1e-8)


def test_jmb_zf_svd_private_waterfill():
    rng = np.random.default_rng(9)
    h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p_t, alpha = 50.0, 0.6
    p = jmb_zf_svd_wf(h, p_t, alpha, 1.0)
    dirs = zf_directions(h)
    gains = np.array([abs(h[:, k].conj() @ dirs[:, k]) ** 2 for k in range(2)])
    q = water_fill(gains, p_t ** alpha)
    got = np.array([np.linalg.norm(p[:, k + 1]) ** 2 for k in range(2)])
    assert np.allclose(got, q.powers, rtol=1e-10)
