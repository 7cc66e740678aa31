import numpy as np
import pytest
from scipy import stats

from penbm import densities as D
from penbm import samplers as S
from penbm.paths import path_max, value_at
from penbm.stats import ks_one_sample, ks_two_sample, z_test_mean


def test_rng_streams_are_reproducible_and_distinct():
    a = S.RngStream(3, 1).generator().random(5)
    np.testing.assert_array_equal(a, S.RngStream(3, 1).generator().random(5))
    assert not np.array_equal(a, S.RngStream(3, 2).generator().random(5))
    assert S.RngStream(3, 1).child(0) != S.RngStream(3, 1).child(1)
    with pytest.raises(TypeError):
        S.as_generator("seed")


def test_bm_endpoint_and_drift():
    p = S.sample_bm(np.random.default_rng(0), 1.0, 0.0, 64, 10_000)
    assert ks_one_sample(p.values[:, -1], stats.norm.cdf).p_value > 0.01
    q = S.sample_bm(np.random.default_rng(1), 1.0, 2.0, 64, 10_000)
    assert z_test_mean(q.values[:, -1], 2.0).passed
    np.testing.assert_array_equal(S.sample_bm(7, 1.0, 0.0, 32).values, S.sample_bm(7, 1.0, 0.0, 32).values)
    assert S.sample_bm(7, m=16).values.shape == (17,)


def test_bridge():
    p = S.sample_bridge(np.random.default_rng(2), 0.3, -0.4, 2.0, 64, 100_000)
    assert np.all(p.values[:, 0] == 0.3) and np.all(p.values[:, -1] == -0.4)
    q = S.sample_bridge(np.random.default_rng(3), 0.0, 0.0, 1.0, 64, 100_000)
    mid = q.values[:, 32]
    se = np.sqrt(2 / mid.size) * 0.25
    assert abs(mid.var() - 0.25) < 3 * se
    with pytest.raises(ValueError):
        S.sample_bridge(0, T=0.0)


def test_bessel3_positive_and_endpoints():
    p = S.sample_bessel3(np.random.default_rng(4), 0.5, 1.0, 128, 1000)
    assert np.all(p.values >= 0) and np.all(p.values[:, 0] == 0.5)
    with pytest.raises(ValueError):
        S.sample_bessel3(0, x=-1.0)
    b = S.sample_bessel3_bridge(np.random.default_rng(5), 0.2, 1.1, 1.0, 128, 1000)
    assert np.all(b.values[:, 0] == 0.2) and np.allclose(b.values[:, -1], 1.1)
    e = S.sample_excursion(np.random.default_rng(6), 128, 1000)
    assert np.all(e.values[:, 1:-1] > 0)


def test_bessel3_bridge_midpoint_vs_conditioning():
    # oracle: free Bessel(3) from 0 conditioned on its endpoint landing within 0.05 of 0
    gen = np.random.default_rng(7)
    n_free, m = 400_000, 64
    w = S.bm_values(gen, (3, n_free), 1.0, m)
    r = np.sqrt((w**2).sum(axis=0))
    # the 3D norm near zero is rare; condition on a small window around 0.3 instead
    y = 0.3
    keep = np.abs(r[:, -1] - y) < 0.05
    ref = r[keep, m // 2]
    b = S.sample_bessel3_bridge(gen, 0.0, y, 1.0, m, 10_000).values[:, m // 2]
    assert keep.sum() > 2000
    assert ks_two_sample(b, ref).p_value > 0.01


def test_meander_and_co_meander():
    gen = np.random.default_rng(8)
    m = S.sample_meander(gen, 512, 2000)
    assert np.all(m.values[:, 1:] > 0)
    c = S.sample_co_meander(gen, 512, 2000)
    assert np.all(c.values[:, 1:] > 0)


def test_updown():
    p, u = S.sample_updown(np.random.default_rng(9), 1.5, 1000, 10_000, return_switch=True)
    assert ks_one_sample(u, D.uniform_density().cdf).p_value > 0.01
    end = p.values[:, -1]
    assert ks_one_sample(end, D.uniform_density(-1.5, 1.5).cdf).p_value > 0.01
    np.testing.assert_allclose(path_max(p), 1.5 * u, atol=1.5e-3)


@pytest.mark.parametrize("method", list(S.AscentMethod))
def test_ascent_ends_at_max(method):
    r = S.sample_ascent(np.random.default_rng(10), method, 256, 200)
    p = r[0] if isinstance(r, tuple) else r
    np.testing.assert_allclose(p.values[:, -1], path_max(p), rtol=1e-12)


def test_ascent_endpoint_rayleigh():
    p = S.sample_ascent(np.random.default_rng(11), "from-meander", 512, 10_000)
    assert ks_one_sample(p.values[:, -1], D.meander_endpoint_density().cdf).p_value > 0.01


def test_co_ascent():
    p, tau, st = S.sample_co_ascent(np.random.default_rng(12), 128, 500, m_sim=2**10, return_stats=True)
    np.testing.assert_allclose(p.values[:, -1], 1 / np.sqrt(tau))
    np.testing.assert_allclose(path_max(p), p.values[:, -1], rtol=1e-9)
    assert st["restarts"] >= 0 and np.all(tau > 0)


def test_williams_drift():
    gen = np.random.default_rng(13)
    p, lvl, tau = S.sample_williams_drift(gen, -1.0, 5.0, 1024, 4000)
    assert ks_one_sample(lvl, D.s_infty_density(-1.0).cdf).p_value > 0.01
    direct = S.sample_bm(gen, 5.0, -1.0, 1024, 4000)
    for s in (1.0, 5.0):
        assert ks_two_sample(value_at(p, s), value_at(direct, s)).p_value > 0.01
    # the global max is the drawn level, attained at tau which is generally off the grid
    hit = tau < 5.0
    gap = lvl[hit] - path_max(p)[hit]
    assert np.all(gap >= -1e-12) and np.all(gap < 3 * np.sqrt(5.0 / 1024))
    with pytest.raises(ValueError):
        S.sample_williams_drift(gen, 0.5)


def test_qnu_path():
    gen = np.random.default_rng(14)
    p, lvl, tau = S.sample_qnu_path(gen, -1.0, 10.0, 1024, 10_000)
    assert ks_one_sample(lvl, stats.expon(scale=1.0).cdf).p_value > 0.01
    assert np.all(path_max(p) <= lvl + 1e-9)
    with pytest.raises(ValueError):
        S.sample_qnu_path(gen, 1.0)


def test_pseudo_bridge_small():
    p, ell, restarts = S.sample_pseudo_bridge(np.random.default_rng(15), 64, 3, dt_sim=1e-3, eps=0.1,
                                              block=2**12)
    assert np.all(np.abs(p.values[:, -1]) < 0.2) and np.all(ell > 0)
    assert np.all(np.abs(p.values).max(axis=1) > 0)


def test_resolve_params():
    assert S.resolve_params("bm", {}) == {"t": 1.0}
    with pytest.raises(ValueError, match="requires h < 0"):
        S.resolve_params("williams-drift", {"h": 0.5})
    with pytest.raises(ValueError):
        S.resolve_params("bm", {"nu": 1.0})
    with pytest.raises(ValueError):
        S.resolve_params("ascent", {"method": "nope"})


def test_generate_batch_worker_independent():
    a, _ = S.generate_batch("meander", 600, 64, seed=5, workers=1, chunk=128)
    b, _ = S.generate_batch("meander", 600, 64, seed=5, workers=3, chunk=128)
    np.testing.assert_array_equal(a.values, b.values)
    p, w = S.generate_batch("ascent", 20, 32, seed=1, method="co-ascent-reweight")
    assert w.shape == (20,) and np.all(w > 0)
