"""Registry of verification experiments.

Each experiment is a function ``(seed, scale, workers) -> list[VerificationReport]``;
``scale`` multiplies every sample size (1.0 gives the documented sizes) so the
same code can run as a quick smoke test.  Experiments are grouped in suites:

``identities``  path-fragment identities (ascent constructions, meander relations,
                Imhof, h-transform, Pitman, Williams, Azema-Yor, reweighting)
``densities``   normalization and sampler-vs-density KS pairings
``partition``   exact vs leading-order partition function
``estimator``   integrity checks of the importance-sampling estimator
``calibration`` null-distribution runs of the statistical tests
``theorem-1.1``, ``theorem-1.2``, ``theorem-1.3``  scaling limits under ``Q_t``
"""
from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import densities
from .gibbs import (Proposal, TheoremSpec, VerificationReport, constant, draw_weighted, make_proposal, run_theorem_experiment,
                    scaled_value)
from .partition import PhaseRegion, asymptotic_partition, classify, exact_partition
from .paths import Path, reverse_increments
from .samplers import (SQRT_HALF_PI, RngStream, bm_values, cell_max, sample_ascent,
                       sample_bessel3, sample_bm, sample_bridge, sample_co_ascent,
                       sample_co_meander, sample_meander, sample_qnu_path, sample_updown,
                       sample_williams_drift)
from .stats import (WeightedSample, ks_one_sample, ks_two_sample, z_test_difference,
                    z_test_mean)

LEVEL = 0.01
CANONICAL_POINTS = ((-1.0, 0.0), (-2.0, 1.0), (-1.0, 1.0), (1.0, 1.0), (2.0, -1.0), (-1.0, -1.0))
REGION_POINTS = {PhaseRegion(classify(nu, h)): (nu, h) for nu, h in CANONICAL_POINTS}


@dataclass(frozen=True)
class Experiment:
    id: str
    suite: str
    description: str
    run: Callable


REGISTRY: dict[str, Experiment] = {}


def experiment(id, suite, description):
    def deco(fn):
        REGISTRY[id] = Experiment(id, suite, description, fn)
        return fn
    return deco


def stream(seed: int, name: str) -> RngStream:
    """Stream keyed by a stable hash of the experiment name."""
    return RngStream(int(seed), zlib.crc32(name.encode()))


def _n(base: int, scale: float) -> int:
    return max(200, int(round(base * scale)))


class _Collector:
    """Builds reports for one experiment run, timing each from the previous one."""

    def __init__(self, exp_id, seed, timer=time.perf_counter):
        self.exp_id, self.seed, self.timer = exp_id, seed, timer
        self.reports: list[VerificationReport] = []
        self._t = timer()

    def _elapsed(self):
        now = self.timer()
        out, self._t = (now - self._t) * 1e3, now
        return out

    def ks(self, name, res, n, level=LEVEL, detail="", **kw):
        self.reports.append(VerificationReport(
            f"{self.exp_id}/{name}", kw.get("region"), kw.get("nu"), kw.get("h"), kw.get("t"),
            int(n), res.statistic, level, bool(res.p_value >= level), float(res.n_eff),
            self.seed, self._elapsed(), res.p_value, detail))

    def z(self, name, zt, n, ess, detail="", sigmas=3.0, **kw):
        self.reports.append(VerificationReport(
            f"{self.exp_id}/{name}", kw.get("region"), kw.get("nu"), kw.get("h"), kw.get("t"),
            int(n), abs(zt.z), sigmas, bool(zt.passed), float(ess), self.seed, self._elapsed(),
            None, detail or f"mean={zt.mean:.6g} se={zt.std_error:.3g}"))

    def bound(self, name, value, threshold, n, ess=None, detail="", below=True, **kw):
        ok = value < threshold if below else value > threshold
        self.reports.append(VerificationReport(
            f"{self.exp_id}/{name}", kw.get("region"), kw.get("nu"), kw.get("h"), kw.get("t"),
            int(n), float(value), float(threshold), bool(ok), float(n if ess is None else ess),
            self.seed, self._elapsed(), None, detail))


def _z_against(sample, target, sigmas=3.0):
    return z_test_mean(sample, target, sigmas)


def _col(p: Path, s: float) -> np.ndarray:
    return p.values[:, int(round(s * p.m))]


# ---------------------------------------------------------------------------
# densities

@experiment("density-normalization", "densities",
            "every closed-form density integrates to 1 within 1e-6")
def density_normalization(seed, scale=1.0, workers=None):
    c = _Collector("density-normalization", seed)
    for name, make in densities.ALL_DENSITIES.items():
        c.bound(name, abs(make().normalization() - 1.0), 1e-6, 0)
    return c.reports


@experiment("sampler-vs-density", "densities",
            "sampler output against closed-form densities by KS at 1%")
def sampler_vs_density(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "sampler-vs-density")
    c = _Collector("sampler-vs-density", seed)
    m = 1024
    c.ks("bessel3-from-0", ks_one_sample(sample_bessel3(rs.generator(0), 0.0, 1.0, m, n).values[:, -1],
                                         densities.bessel3_origin_density()), n)
    c.ks("bessel3-from-1", ks_one_sample(sample_bessel3(rs.generator(1), 1.0, 1.0, m, n).values[:, -1],
                                         densities.bessel3_density(1.0)), n)
    c.ks("meander-endpoint", ks_one_sample(sample_meander(rs.generator(2), m, n).values[:, -1],
                                           densities.meander_endpoint_density()), n)
    c.ks("co-meander-endpoint", ks_one_sample(sample_co_meander(rs.generator(3), m, n).values[:, -1],
                                              densities.co_meander_endpoint_density()), n)
    # argmax time with the maximum refined inside each cell (exact up to dt / 2)
    g = rs.generator(4)
    mm = 4096
    w = bm_values(g, (n,), 1.0, mm)
    k = np.argmax(cell_max(g, w, 1.0 / mm), axis=-1)
    theta = (k + g.random(n)) / mm
    c.ks("argmax-arcsine", ks_one_sample(theta, densities.arcsine_density()), n)
    c.ks("argmax-trivariate-u", ks_one_sample(theta, densities.trivariate_u_marginal()), n)
    g = rs.generator(5)
    br = sample_bridge(g, 0.0, 0.0, 1.0, 256, n)
    bmax = cell_max(g, br.values, br.dt).max(axis=-1)
    c.ks("bridge-max", ks_one_sample(bmax, densities.bridge_max_density()), n)
    c.z("bridge-max-ccdf-at-1", _z_against(WeightedSample((bmax > 1).astype(float)),
                                            densities.bridge_max_ccdf(1.0, 0.0, 1.0)), n, n)
    h = -0.5
    _, S, _ = sample_williams_drift(rs.generator(6), h, 1.0, 8, n)
    c.ks("s-infinity-exponential", ks_one_sample(S, densities.s_infty_density(h)), n, h=h)
    _, tau = sample_co_ascent(rs.generator(7), 16, n, m_sim=2**10)
    c.ks("first-passage-time", ks_one_sample(tau, densities.first_passage_density()), n)
    return c.reports


# ---------------------------------------------------------------------------
# ascent constructions

ASCENT_TIMES = (0.25, 0.5, 1.0)


@experiment("ascent-constructions", "identities",
            "meander reversal, pre-maximum rescaling and reweighted first passage give the "
            "same ascent; endpoint is Rayleigh; reweighting identity for endpoint and sup")
def ascent_constructions(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "ascent-constructions")
    c = _Collector("ascent-constructions", seed)
    m = 512
    fm = sample_ascent(rs.generator(0), "from-meander", m, n)
    dn = sample_ascent(rs.generator(1), "denisov", m, n, m_sim=2**14)
    ca, tau = sample_co_ascent(rs.generator(2), m, n, m_sim=2**12)
    wts = SQRT_HALF_PI / np.sqrt(tau)
    samples = {
        "from-meander": lambda s: WeightedSample(_col(fm, s)),
        "denisov": lambda s: WeightedSample(_col(dn, s)),
        "co-ascent-reweight": lambda s: WeightedSample(_col(ca, s), wts),
    }
    ray = densities.meander_endpoint_density()
    for name, smp in samples.items():
        c.ks(f"{name}/endpoint-rayleigh", ks_one_sample(smp(1.0), ray), n)
    names = list(samples)
    for i in range(3):
        for j in range(i + 1, 3):
            for s in ASCENT_TIMES:
                c.ks(f"{names[i]}-vs-{names[j]}/s={s}", ks_two_sample(samples[names[i]](s),
                                                                      samples[names[j]](s)), n)
    # E[F(a)] = sqrt(pi/2) E[F(co-ascent) co-ascent_1]
    for fname, F in (("endpoint", lambda p: p.values[:, -1]), ("sup", lambda p: p.values.max(axis=-1))):
        lhs = F(fm)
        rhs = SQRT_HALF_PI * F(ca) * ca.values[:, -1]
        zt = z_test_difference(lhs.mean(), lhs.std(ddof=1) / math.sqrt(n),
                               rhs.mean(), rhs.std(ddof=1) / math.sqrt(n))
        c.z(f"co-ascent-reweighting/{fname}", zt, n, n)
    return c.reports


@experiment("ascent-mean-zero", "identities",
            "E[int_0^1 a_s / a_1 ds] = 0, computed from reweighted first-passage paths")
def ascent_mean_zero(seed, scale=1.0, workers=None):
    n = _n(100_000, scale)
    rs = stream(seed, "ascent-mean-zero")
    c = _Collector("ascent-mean-zero", seed)
    m = 256
    vals, wts = [], []
    for j, k in enumerate(range(0, n, 20_000)):
        p, tau = sample_co_ascent(rs.generator(j), m, min(20_000, n - k), m_sim=2**11)
        v = p.values
        vals.append((v[:, 1:-1].sum(axis=1) + 0.5 * v[:, -1]) / m / v[:, -1])
        wts.append(1.0 / np.sqrt(tau))
    s = WeightedSample(np.concatenate(vals), np.concatenate(wts))
    c.z("weighted-integral", _z_against(s, 0.0), n, s.ess)
    return c.reports


@experiment("co-ascent-co-meander", "identities",
            "rescaled first-passage path equals the reversed co-meander in law")
def co_ascent_co_meander(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "co-ascent-co-meander")
    c = _Collector("co-ascent-co-meander", seed)
    m = 512
    ca, tau = sample_co_ascent(rs.generator(0), m, n, m_sim=2**12)
    cm = reverse_increments(sample_co_meander(rs.generator(1), m, n))
    for s in ASCENT_TIMES:
        c.ks(f"s={s}", ks_two_sample(_col(ca, s), _col(cm, s)), n)
    c.ks("endpoint-half-normal", ks_one_sample(ca.values[:, -1], densities.half_normal_density()), n)
    return c.reports


@experiment("williams-reversal", "identities",
            "1 - X_{tau_1 - s} rescaled by tau_1 matches Bessel(3) run to its last hit of 1, "
            "i.e. the co-meander, at relative times 1/4, 1/2, 3/4")
def williams_reversal(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "williams-reversal")
    c = _Collector("williams-reversal", seed)
    m = 512
    ca, tau = sample_co_ascent(rs.generator(0), m, n, m_sim=2**12)
    rev = reverse_increments(ca)  # (1 - X_{(1-u) tau_1}) / sqrt(tau_1)
    cm = sample_co_meander(rs.generator(1), m, n)
    for u in (0.25, 0.5, 0.75):
        c.ks(f"u={u}", ks_two_sample(_col(rev, u), _col(cm, u)), n)
    return c.reports


# ---------------------------------------------------------------------------
# meander relations and appendix identities

@experiment("imhof", "identities",
            "E[F(meander)] = sqrt(pi/2) E[F(R) / R_1] for F = sup and F = endpoint")
def imhof(seed, scale=1.0, workers=None):
    n = _n(20_000, scale)
    rs = stream(seed, "imhof")
    c = _Collector("imhof", seed)
    m = 512
    me = sample_meander(rs.generator(0), m, n)
    R = sample_bessel3(rs.generator(1), 0.0, 1.0, m, n)
    for name, F in (("sup", lambda v: v.max(axis=-1)), ("endpoint-below-1", lambda v: (v[:, -1] < 1) * 1.0)):
        a = F(me.values)
        b = SQRT_HALF_PI * F(R.values) / R.values[:, -1]
        c.z(name, z_test_difference(a.mean(), a.std(ddof=1) / math.sqrt(n),
                                    b.mean(), b.std(ddof=1) / math.sqrt(n)), n, n)
    return c.reports


@experiment("co-imhof", "identities",
            "E[F(co-meander)] = E[F(R) / R_1^2] for F = 1{R_1 > 1} and F = sup * 1{R_1 > 1}")
def co_imhof(seed, scale=1.0, workers=None):
    n = _n(20_000, scale)
    rs = stream(seed, "co-imhof")
    c = _Collector("co-imhof", seed)
    m = 512
    cm = sample_co_meander(rs.generator(0), m, n)
    R = sample_bessel3(rs.generator(1), 0.0, 1.0, m, n)
    for name, F in (("endpoint-above-1", lambda v: (v[:, -1] > 1) * 1.0),
                    ("sup-on-endpoint-above-1", lambda v: v.max(axis=-1) * (v[:, -1] > 1))):
        a = F(cm.values)
        b = F(R.values) / R.values[:, -1] ** 2
        c.z(name, z_test_difference(a.mean(), a.std(ddof=1) / math.sqrt(n),
                                    b.mean(), b.std(ddof=1) / math.sqrt(n)), n, n)
    c.z("closed-form", _z_against(WeightedSample((cm.values[:, -1] > 1) * 1.0),
                                  2 * stats.norm.sf(1.0)), n, n)
    return c.reports


@experiment("meander-co-meander", "identities",
            "E[F(meander)] = sqrt(pi/2) E[F(co-meander) co-meander_1] for F = endpoint and sup")
def meander_co_meander(seed, scale=1.0, workers=None):
    n = _n(20_000, scale)
    rs = stream(seed, "meander-co-meander")
    c = _Collector("meander-co-meander", seed)
    m = 512
    me = sample_meander(rs.generator(0), m, n)
    cm = sample_co_meander(rs.generator(1), m, n)
    for name, F in (("endpoint", lambda v: v[:, -1]), ("sup", lambda v: v.max(axis=-1))):
        a = F(me.values)
        b = SQRT_HALF_PI * F(cm.values) * cm.values[:, -1]
        c.z(name, z_test_difference(a.mean(), a.std(ddof=1) / math.sqrt(n),
                                    b.mean(), b.std(ddof=1) / math.sqrt(n)), n, n)
    return c.reports


def killed_weight(values: np.ndarray, dt: float) -> np.ndarray:
    """``P(path stays positive | grid values)`` for Brownian paths: product of bridge
    non-crossing probabilities ``1 - exp(-2 a b / dt)`` over cells."""
    a, b = values[:, :-1], values[:, 1:]
    with np.errstate(over="ignore"):
        p = np.where((a > 0) & (b > 0), -np.expm1(-2 * a * b / dt), 0.0)
    return np.prod(p, axis=-1)


@experiment("h-transform", "identities",
            "E_1[F(R)] = E_1[F(X) X_1; I_1 > 0] for F = 1{endpoint < 1} and F = endpoint")
def h_transform(seed, scale=1.0, workers=None):
    n = _n(50_000, scale)
    rs = stream(seed, "h-transform")
    c = _Collector("h-transform", seed)
    m = 256
    R = sample_bessel3(rs.generator(0), 1.0, 1.0, m, n).values
    X = 1.0 + sample_bm(rs.generator(1), 1.0, 0.0, m, n).values
    kw = X[:, -1] * killed_weight(X, 1.0 / m)
    for name, F in (("endpoint-below-1", lambda v: (v[:, -1] < 1) * 1.0), ("endpoint", lambda v: v[:, -1])):
        a, b = F(R), F(X) * kw
        c.z(name, z_test_difference(a.mean(), a.std(ddof=1) / math.sqrt(n),
                                    b.mean(), b.std(ddof=1) / math.sqrt(n)), n, n)
    return c.reports


@experiment("initial-segment-reweighting", "identities",
            "E_0[F] = E_x[F exp((x^2 - 2 x X_delta) / (2 delta))] for F ignoring [0, delta]; "
            "x = 0.5, delta = 0.25")
def initial_segment_reweighting(seed, scale=1.0, workers=None):
    n = _n(50_000, scale)
    rs = stream(seed, "initial-segment-reweighting")
    c = _Collector("initial-segment-reweighting", seed)
    x, delta, m = 0.5, 0.25, 64
    P0 = sample_bm(rs.generator(0), 1.0, 0.0, m, n).values
    Px = x + sample_bm(rs.generator(1), 1.0, 0.0, m, n).values
    w = np.exp((x * x - 2 * x * Px[:, int(delta * m)]) / (2 * delta))
    for name, F in (("endpoint", lambda v: v[:, -1]),
                    ("endpoint-above-half", lambda v: (v[:, -1] > 0.5) * 1.0),
                    ("max-after-delta", lambda v: v[:, int(delta * m):].max(axis=-1))):
        a, b = F(P0), F(Px) * w
        c.z(name, z_test_difference(a.mean(), a.std(ddof=1) / math.sqrt(n),
                                    b.mean(), b.std(ddof=1) / math.sqrt(n)), n, n)
    return c.reports


@experiment("azema-yor", "identities",
            "M_t = exp(nu S_t) - nu exp(nu S_t)(S_t - X_t) has mean 1 at t = 1 and 4 (nu = -1)")
def azema_yor(seed, scale=1.0, workers=None):
    n = _n(50_000, scale)
    rs = stream(seed, "azema-yor")
    c = _Collector("azema-yor", seed)
    nu, m = -1.0, 256
    for i, t in enumerate((1.0, 4.0)):
        g = rs.generator(i)
        X = bm_values(g, (n,), t, m)
        S = cell_max(g, X, t / m).max(axis=-1)
        M = np.exp(nu * S) * (1 - nu * (S - X[:, -1]))
        c.z(f"t={t:g}", _z_against(WeightedSample(M), 1.0), n, n, nu=nu, t=t)
    return c.reports


@experiment("pitman", "identities", "2S - X is a Bessel(3) process from 0: marginals at s = 1/2, 1")
def pitman(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "pitman")
    c = _Collector("pitman", seed)
    m = 256
    g = rs.generator(0)
    X = bm_values(g, (n,), 1.0, m)
    S = np.maximum.accumulate(cell_max(g, X, 1.0 / m), axis=-1)
    for s in (0.5, 1.0):
        k = int(s * m)
        v = 2 * S[:, k - 1] - X[:, k]
        c.ks(f"s={s}", ks_one_sample(v, densities.bessel3_origin_density(s)), n)
    return c.reports


@experiment("williams-decomposition", "identities",
            "Williams path decomposition of drift h < 0: S_inf exponential and "
            "marginals equal direct drifted Brownian motion at t = 5")
def williams_decomposition(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "williams-decomposition")
    c = _Collector("williams-decomposition", seed)
    h, t, m = -0.5, 5.0, 256
    _, S, _ = sample_williams_drift(rs.generator(0), h, 1.0, 8, _n(100_000, scale))
    c.ks("s-infinity", ks_one_sample(S, densities.s_infty_density(h)), S.size, h=h)
    wp, _, _ = sample_williams_drift(rs.generator(1), h, t, m, n)
    bp = sample_bm(rs.generator(2), t, h, m, n)
    for s in (0.5, 1.0):
        c.ks(f"marginal/s={s * t:g}", ks_two_sample(_col(wp, s), _col(bp, s)), n, h=h, t=t)
    return c.reports


@experiment("penalized-path", "identities",
            "path under the limiting measure for h = 0: S_inf ~ Exp(-nu); its law on [0, t] "
            "equals Brownian motion weighted by the Azema-Yor martingale; "
            "X_t / sqrt(t) approaches -Bessel(3) as t grows")
def penalized_path(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "penalized-path")
    c = _Collector("penalized-path", seed)
    nu, m = -1.0, 256
    p, S, _ = sample_qnu_path(rs.generator(0), nu, 100.0, m, n)
    c.ks("s-infinity", ks_one_sample(S, densities.s_infty_density(nu / 2)), n, nu=nu)
    g = rs.generator(1)
    X = bm_values(g, (n,), 100.0, m)
    Sb = cell_max(g, X, 100.0 / m).max(axis=-1)
    M = np.exp(nu * Sb) * (1 - nu * (Sb - X[:, -1]))
    c.ks("t=100/vs-martingale-weighted-bm",
         ks_two_sample(p.values[:, -1], WeightedSample(X[:, -1], M)), n, nu=nu, t=100.0)
    dists = []
    for i, t in enumerate((100.0, 1000.0, 10000.0)):
        q, _, _ = sample_qnu_path(rs.generator(2 + i), nu, t, 16, n)
        dists.append(ks_one_sample(q.values[:, -1] / math.sqrt(t),
                                   lambda y: stats.maxwell.sf(-np.asarray(y))).statistic)
    c.bound("distance-to-neg-bessel3-decreasing", float(np.max(np.diff(dists))), 0.0, n, nu=nu,
            detail="KS distances at t=100, 1000, 10000: " + ", ".join(f"{d:.4f}" for d in dists))
    return c.reports


@experiment("updown", "identities", "up-down process: uniform switch time and endpoint")
def updown(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "updown")
    c = _Collector("updown", seed)
    slope = 1.5
    p, u = sample_updown(rs.generator(0), slope, 256, n, return_switch=True)
    c.ks("switch-uniform", ks_one_sample(u, densities.uniform_density()), n)
    c.ks("endpoint-uniform", ks_one_sample(p.values[:, -1], densities.uniform_density(-slope, slope)), n)
    return c.reports


@experiment("bridge", "identities", "Brownian bridge midpoint variance 1/4")
def bridge(seed, scale=1.0, workers=None):
    n = _n(100_000, scale)
    rs = stream(seed, "bridge")
    c = _Collector("bridge", seed)
    p = sample_bridge(rs.generator(0), 0.0, 0.0, 1.0, 16, n)
    c.z("midpoint-variance", _z_against(WeightedSample(_col(p, 0.5) ** 2), 0.25), n, n)
    return c.reports


@experiment("ballistic-drift", "identities",
            "drift-1 Brownian motion: P(sup |X_{st}/t - s| > 0.2) matches its exact value at "
            "t = 100 and is below 0.05 at t = 150")
def ballistic_drift(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    rs = stream(seed, "ballistic-drift")
    c = _Collector("ballistic-drift", seed)
    m = 8192
    for i, t in enumerate((100.0, 150.0)):
        X = sample_bm(rs.generator(i), t, 1.0, m, n).values
        s = np.linspace(0.0, 1.0, m + 1)
        dev = (np.abs(X / t - s).max(axis=-1) > 0.2).astype(float)
        exact = 1 - sup_abs_bm_cdf(0.2 * math.sqrt(t))
        if t == 100.0:
            c.z("t=100/exact", _z_against(WeightedSample(dev), exact), n, n, h=1.0, t=t)
        else:
            c.bound("t=150/below-0.05", dev.mean(), 0.05, n, h=1.0, t=t,
                    detail=f"exact={exact:.4f}")
    return c.reports


def sup_abs_bm_cdf(a: float, terms: int = 200) -> float:
    """``P(sup_{s <= 1} |W_s| < a)`` from the theta-series."""
    k = np.arange(terms)
    return float(4 / np.pi * np.sum((-1.0) ** k / (2 * k + 1)
                                    * np.exp(-((2 * k + 1) ** 2) * np.pi**2 / (8 * a * a))))


# ---------------------------------------------------------------------------
# partition function

PARTITION_LADDER = (20.0, 40.0, 60.0)


@experiment("partition-asymptotics", "partition",
            "exact/asymptotic partition ratio within 5% at t = 60 and trending to 1 over "
            "t = 20, 40, 60 at the six canonical points; Gaussian case (0, 1) exact")
def partition_asymptotics(seed, scale=1.0, workers=None):
    c = _Collector("partition-asymptotics", seed)
    for nu, h in CANONICAL_POINTS:
        region = classify(nu, h).value
        errs = [abs(math.exp(exact_partition(nu, h, t) - asymptotic_partition(nu, h, t)) - 1)
                for t in PARTITION_LADDER]
        c.bound("ratio-t=60", errs[-1], 0.05, 0, region=region, nu=nu, h=h, t=60.0,
                detail="|ratio - 1| along ladder: " + ", ".join(f"{e:.4f}" for e in errs))
        c.bound("trend", float(np.max(np.diff(errs))), 1e-9, 0, region=region, nu=nu, h=h)
    worst = max(abs(exact_partition(0.0, 1.0, t) - t / 2) for t in (1.0, *PARTITION_LADDER))
    c.bound("gaussian-case", worst, 1e-6, 0, nu=0.0, h=1.0)
    return c.reports


# ---------------------------------------------------------------------------
# estimator integrity

@experiment("estimator-integrity", "estimator",
            "F = 1 gives exactly 1; mean weight matches the exact partition at t = 10; "
            "duality Q^{nu,h}[F] = Q^{nu,-(nu+h)}[F o phi]")
def estimator_integrity(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    c = _Collector("estimator-integrity", seed)
    t, m = 10.0, 512
    for i, (nu, h) in enumerate(CANONICAL_POINTS):
        region = classify(nu, h)
        d = draw_weighted(constant(1.0), nu, h, t, make_proposal(region, nu, h), n,
                          stream(seed, f"estimator-integrity/{i}"), m, workers=workers)
        est = d.estimate("const")
        c.bound("f-identically-one", abs(est.mean - 1.0), 1e-12, n, est.ess,
                region=region.value, nu=nu, h=h, t=t)
        pe = d.partition()
        ex = exact_partition(nu, h, t)
        z = (math.exp(pe.log_mean - ex) - 1) / pe.rel_se
        c.bound("partition", abs(z), 3.0, n, pe.ess, region=region.value, nu=nu, h=h, t=t,
                detail=f"log_mc={pe.log_mean:.6f} log_exact={ex:.6f} rel_se={pe.rel_se:.3g}")
    for i, (nu, h) in enumerate(((-2.0, 1.0), (1.0, 1.0), (-1.0, 0.0))):
        nu2, h2 = nu, -(nu + h)
        G = scaled_value(0.5, 0.3)
        a = draw_weighted({"g": G}, nu, h, t, make_proposal(classify(nu, h), nu, h), n,
                          stream(seed, f"duality/{i}/a"), m, workers=workers).estimate("g")
        b = draw_weighted({"g": G.after_phi()}, nu2, h2, t,
                          make_proposal(classify(nu2, h2), nu2, h2), n,
                          stream(seed, f"duality/{i}/b"), m, workers=workers).estimate("g")
        zt = z_test_difference(a.mean, a.std_error, b.mean, b.std_error)
        c.z("duality", zt, n, min(a.ess, b.ess), region=classify(nu, h).value, nu=nu, h=h, t=t)
    return c.reports


@experiment("meander-limit-row", "estimator",
            "(nu, h) = (-1, 0): endpoint of X_t / sqrt(t) under Q_t at t = 100 matches its "
            "exact finite-t mean and the gap to -sqrt(pi/2) shrinks from t = 100 to 200")
def meander_limit_row(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    c = _Collector("meander-limit-row", seed)
    nu, h, eps = -1.0, 0.0, 1e-5
    gaps = []
    for i, t in enumerate((100.0, 200.0)):
        exact = (exact_partition(nu, eps, t) - exact_partition(nu, -eps, t)) / (2 * eps) / math.sqrt(t)
        d = draw_weighted(scaled_value(0.5, 1.0), nu, h, t, make_proposal(PhaseRegion.L1, nu, h),
                          n, stream(seed, f"meander-limit-row/{i}"), 1024, workers=workers)
        s = d.sample(scaled_value(0.5, 1.0).name)
        gaps.append(abs(s.mean() + SQRT_HALF_PI))
        if t == 100.0:
            c.z("t=100/exact-mean", _z_against(s, exact), n, s.ess, region="L1", nu=nu, h=h, t=t)
    c.bound("gap-to-limit-shrinks", gaps[1] - gaps[0], 0.0, n, region="L1", nu=nu, h=h,
            detail=f"gaps {gaps[0]:.4f}, {gaps[1]:.4f}")
    return c.reports


@experiment("proposal-efficiency", "estimator",
            "R3 drift proposal at (-1, -1), t = 40: ESS at least 10x the zero-drift ESS")
def proposal_efficiency(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    c = _Collector("proposal-efficiency", seed)
    nu, h, t = -1.0, -1.0, 40.0
    e1 = draw_weighted(constant(), nu, h, t, make_proposal(PhaseRegion.R3, nu, h), n,
                       stream(seed, "proposal-efficiency/a"), 512, workers=workers).ess
    e0 = draw_weighted(constant(), nu, h, t, Proposal.constant(0.0), n,
                       stream(seed, "proposal-efficiency/b"), 512, workers=workers).ess
    c.bound("ess-ratio", e1 / e0, 10.0, n, e1, below=False, region="R3", nu=nu, h=h, t=t,
            detail=f"ess drift={e1:.1f} zero={e0:.1f}")
    return c.reports


# ---------------------------------------------------------------------------
# calibration of the statistical tests

@experiment("calibration", "calibration",
            "null runs: KS one-sample, KS two-sample and z-test pass at 1% in at least "
            "98 of 100 repetitions")
def calibration(seed, scale=1.0, workers=None):
    n = _n(10_000, scale)
    reps = 100
    rs = stream(seed, "calibration")
    c = _Collector("calibration", seed)
    norm = densities.normal_density()
    one = two = zt = 0
    for r in range(reps):
        g = rs.generator(r)
        one += ks_one_sample(g.standard_normal(n), norm).p_value > LEVEL
        two += ks_two_sample(g.standard_normal(n), g.standard_normal(n)).p_value > LEVEL
        zt += z_test_mean(g.standard_normal(n), 0.0).passed
    # weighted null: exponential proposal for a standard exponential target tilted to rate 2
    wpass = 0
    for r in range(reps):
        g = rs.generator(reps + r)
        x = g.standard_exponential(n)
        s = WeightedSample(x, np.exp(-x))
        wpass += ks_one_sample(s, lambda y: -np.expm1(-2 * np.maximum(y, 0))).p_value > LEVEL
    for name, k in (("ks-one-sample", one), ("ks-two-sample", two), ("z-test", zt),
                    ("weighted-ks", wpass)):
        c.bound(name, k, 97.5, reps * n, below=False, detail=f"{k}/{reps} null passes")
    return c.reports


# ---------------------------------------------------------------------------
# scaling-limit theorems

def _theorem_runner(theorem, region):
    nu, h = REGION_POINTS[PhaseRegion(region)]

    def run(seed, scale=1.0, workers=None):
        spec = TheoremSpec(theorem, nu, h, n=_n(10_000, scale))
        return run_theorem_experiment(spec, seed=seed, workers=workers)
    return run


for _r in PhaseRegion:
    REGISTRY[f"theorem-1.1/{_r.value}"] = Experiment(
        f"theorem-1.1/{_r.value}", "theorem-1.1",
        f"scaling limit under Q_t in region {_r.value} along t = 25, 50, 100, 200",
        _theorem_runner("1.1", _r))
for _r in (PhaseRegion.R2, PhaseRegion.R3):
    REGISTRY[f"theorem-1.2/{_r.value}"] = Experiment(
        f"theorem-1.2/{_r.value}", "theorem-1.2",
        f"centered endpoint under Q_t in region {_r.value} is standard normal in the limit",
        _theorem_runner("1.2", _r))
REGISTRY["theorem-1.3/L3"] = Experiment(
    "theorem-1.3/L3", "theorem-1.3",
    "endpoint centered by 2 S_t + h t on the critical line L3 is standard normal in the limit",
    _theorem_runner("1.3", PhaseRegion.L3))

SUITES = sorted({e.suite for e in REGISTRY.values()})


def select(suite: str | None = None, region: str | None = None,
           ids: list[str] | None = None) -> list[Experiment]:
    """Experiments of a suite (or ``"all"``), optionally filtered by region or ids."""
    if ids:
        unknown = [i for i in ids if i not in REGISTRY]
        if unknown:
            raise KeyError(f"unknown experiment(s): {', '.join(unknown)}")
        return [REGISTRY[i] for i in ids]
    if suite is None or suite == "all":
        out = list(REGISTRY.values())
    elif suite in SUITES:
        out = [e for e in REGISTRY.values() if e.suite == suite]
    else:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ['all'])}")
    if region is not None:
        PhaseRegion(region)
        out = [e for e in out if e.id.endswith("/" + region)]
        if not out:
            raise KeyError(f"suite {suite!r} has no experiment for region {region}")
    return out


def run_experiments(exps, seed: int, scale: float = 1.0, workers=None) -> list[VerificationReport]:
    reports = []
    for e in exps:
        reports.extend(e.run(seed, scale, workers))
    return reports
