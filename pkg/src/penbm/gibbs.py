"""Self-normalized importance sampling for the Gibbs measures ``Q_t^{nu,h}``.

``Q_t[F] = E_0[F Gamma_t] / E_0[Gamma_t]`` with ``Gamma_t = exp(nu S_t + h X_t)``.
Paths are drawn from a proposal, each carrying the log weight
``log Gamma_t + log dP_0/dProposal``; estimates are weighted averages with the
largest log weight subtracted before exponentiating.

Two proposal families are provided:

* :class:`Proposal` - Brownian motion with a piecewise-constant drift, optionally
  switching between two drifts at a uniform random time (for the critical line
  ``L3``).  The running maximum is refined exactly inside each grid cell so
  ``S_t`` carries no grid bias.
* :class:`ExtremaProposal` - exact sampling from ``Q_t`` itself: the triple
  ``(S_t, S_t - X_t, Theta_t)`` is drawn from its tilted joint density and the path
  is filled in with Bessel(3) bridges on either side of the maximum.
"""
from __future__ import annotations

import json
import logging
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special, stats
from scipy.optimize import elementwise

from . import densities
from .partition import PhaseRegion, classify, exact_partition
from .samplers import RngStream, bessel3_bridge_at, cell_max, default_workers
from .stats import WeightedSample, ks_critical_value, ks_one_sample

log = logging.getLogger(__name__)

DEFAULT_M = 2048


# ---------------------------------------------------------------------------
# path batches and functionals

@dataclass(frozen=True, eq=False)
class PathBatch:
    """Paths on ``[0, t]`` with their exact maxima and argmax times."""

    values: np.ndarray  # (n, m + 1)
    t: float
    sup: np.ndarray
    theta: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[-1] - 1

    def scaled(self, alpha: float) -> np.ndarray:
        return self.values / self.t**alpha

    def value_at(self, s: float) -> np.ndarray:
        x = s * self.m
        k = min(int(math.floor(x)), self.m - 1)
        f = x - k
        return self.values[:, k] * (1 - f) + self.values[:, k + 1] * f

    def phi(self) -> "PathBatch":
        """Time reversal ``X_{t-s} - X_t``; the maximum becomes ``S_t - X_t``."""
        v = self.values
        end = v[:, -1]
        return PathBatch(v[:, ::-1] - end[:, None], self.t, self.sup - end, self.t - self.theta)


@dataclass(frozen=True)
class PathFunctional:
    """Map from a :class:`PathBatch` to one real per path.

    When ``bound`` is set every evaluation is checked against it.
    """

    fn: Callable
    name: str = "F"
    bound: float | None = None
    lipschitz: float | None = None

    def __call__(self, batch: PathBatch) -> np.ndarray:
        out = np.asarray(self.fn(batch), dtype=float)
        if self.bound is not None and np.any(np.abs(out) > self.bound * (1 + 1e-12)):
            raise ValueError(f"functional {self.name} exceeded its bound {self.bound}")
        return out

    def after_phi(self) -> "PathFunctional":
        """``F o phi``: evaluate after time reversal of the path."""
        return PathFunctional(lambda b: self.fn(b.phi()), f"{self.name}.phi", self.bound,
                              self.lipschitz)


def constant(c=1.0) -> PathFunctional:
    return PathFunctional(lambda b: np.full(b.values.shape[0], float(c)), "const", abs(c), 0.0)


def scaled_endpoint(alpha: float) -> PathFunctional:
    return PathFunctional(lambda b: b.values[:, -1] / b.t**alpha, f"endpoint[a={alpha}]")


def scaled_value(alpha: float, s: float) -> PathFunctional:
    return PathFunctional(lambda b: b.value_at(s) / b.t**alpha, f"value[s={s},a={alpha}]")


def sup_distance_to_line(slope: float) -> PathFunctional:
    """``sup_s |X_{st}/t - slope * s|`` on the grid."""
    def fn(b):
        s = np.linspace(0.0, 1.0, b.m + 1)
        return np.abs(b.values / b.t - slope * s).max(axis=-1)
    return PathFunctional(fn, f"supdist[slope={slope}]")


def argmax_fraction() -> PathFunctional:
    return PathFunctional(lambda b: b.theta / b.t, "argmax/t", 1.0)


def centered_endpoint(drift: float) -> PathFunctional:
    return PathFunctional(lambda b: (b.values[:, -1] - drift * b.t) / np.sqrt(b.t),
                          f"centered[drift={drift}]")


def random_centered_endpoint(h: float) -> PathFunctional:
    """``(X_t - (2 S_t + h t)) / sqrt(t)``."""
    return PathFunctional(lambda b: (b.values[:, -1] - 2 * b.sup - h * b.t) / np.sqrt(b.t),
                          "random-centered")


def scaled_sup(alpha: float) -> PathFunctional:
    return PathFunctional(lambda b: b.sup / b.t**alpha, f"sup[a={alpha}]")


def integral_scaled(alpha: float) -> PathFunctional:
    def fn(b):
        v = b.values / b.t**alpha
        return (v[:, 1:-1].sum(axis=-1) + 0.5 * (v[:, 0] + v[:, -1])) / b.m
    return PathFunctional(fn, f"integral[a={alpha}]")


# ---------------------------------------------------------------------------
# proposals

@dataclass(frozen=True, eq=False)
class Draw:
    batch: PathBatch
    log_weight: np.ndarray


@dataclass(frozen=True)
class Proposal:
    """Brownian motion with a piecewise-constant drift schedule.

    ``schedule`` lists ``(end_fraction, drift)`` pairs partitioning ``[0, 1]``.
    With ``switch = (d1, d2)`` the drift is ``d1`` before a uniform random grid
    time and ``d2`` after it; ``switch_weight="mixture"`` weights against the
    exact mixture density (a log-sum-exp over all switch positions) while
    ``"conditional"`` uses the Girsanov density given the drawn switch.
    """

    schedule: tuple = ((1.0, 0.0),)
    switch: tuple | None = None
    switch_weight: str = "mixture"
    kind: str = field(default="drift", init=False)

    def __post_init__(self):
        ends = [e for e, _ in self.schedule]
        if not ends or abs(ends[-1] - 1.0) > 1e-12 or any(b <= a for a, b in zip(ends, ends[1:])):
            raise ValueError("schedule end fractions must increase to 1")
        if not all(np.isfinite(d) for _, d in self.schedule):
            raise ValueError("drifts must be finite")
        if self.switch_weight not in ("mixture", "conditional"):
            raise ValueError("switch_weight must be 'mixture' or 'conditional'")

    @classmethod
    def constant(cls, drift: float) -> "Proposal":
        return cls(((1.0, float(drift)),))

    @classmethod
    def switching(cls, d1: float, d2: float, weighting="mixture") -> "Proposal":
        return cls(((1.0, 0.0),), (float(d1), float(d2)), weighting)

    def describe(self) -> dict:
        return {"kind": self.kind, "schedule": [list(p) for p in self.schedule],
                "switch": None if self.switch is None else list(self.switch),
                "switch_weight": self.switch_weight}

    def drifts(self, m: int) -> np.ndarray:
        mid = (np.arange(m) + 0.5) / m
        ends = np.array([e for e, _ in self.schedule])
        vals = np.array([d for _, d in self.schedule])
        return vals[np.minimum(np.searchsorted(ends, mid), len(vals) - 1)]

    def draw(self, gen, n: int, nu: float, h: float, t: float, m: int) -> Draw:
        dt = t / m
        z = gen.standard_normal((n, m)) * np.sqrt(dt)
        if self.switch is None:
            mu = np.broadcast_to(self.drifts(m), (n, m))
        else:
            d1, d2 = self.switch
            J = gen.integers(0, m + 1, n)
            mu = np.where(np.arange(m)[None, :] < J[:, None], d1, d2)
        dx = z + mu * dt
        values = np.zeros((n, m + 1))
        np.cumsum(dx, axis=1, out=values[:, 1:])
        if self.switch is None or self.switch_weight == "conditional":
            log_ratio = -(mu * dx).sum(axis=1) + 0.5 * (mu**2).sum(axis=1) * dt
        else:
            d1, d2 = self.switch
            A = np.zeros((n, m + 1))
            B = np.zeros((n, m + 1))
            np.cumsum(d1 * dx - 0.5 * d1 * d1 * dt, axis=1, out=A[:, 1:])
            np.cumsum(d2 * dx - 0.5 * d2 * d2 * dt, axis=1, out=B[:, 1:])
            L = A + (B[:, -1:] - B)
            log_ratio = -(special.logsumexp(L, axis=1) - math.log(m + 1))
        cm = cell_max(gen, values, dt)
        k = np.argmax(cm, axis=1)
        sup = cm[np.arange(n), k]
        theta = (k + 0.5) * dt
        lw = nu * sup + h * values[:, -1] + log_ratio
        return Draw(PathBatch(values, t, sup, theta), lw)


def girsanov_log_correction(values: np.ndarray, duration: float, proposal: Proposal,
                            switch_index=None) -> np.ndarray:
    """``log dP_0/dProposal`` along grid paths for a deterministic drift schedule.

    Equals ``-sum mu_k dX_k + 0.5 sum mu_k^2 ds``.  For switching proposals pass
    the switch grid index to get the conditional correction.
    """
    values = np.atleast_2d(values)
    m = values.shape[-1] - 1
    dt = duration / m
    dx = np.diff(values, axis=-1)
    if proposal.switch is None:
        mu = proposal.drifts(m)[None, :]
    else:
        if switch_index is None:
            raise ValueError("switching proposal needs the switch index")
        d1, d2 = proposal.switch
        mu = np.where(np.arange(m)[None, :] < np.asarray(switch_index)[..., None], d1, d2)
    out = -(mu * dx).sum(axis=-1) + 0.5 * (mu**2).sum(axis=-1) * dt
    return out if out.size > 1 else float(out[0])


def gamma_log_weight(values, nu: float, h: float, sup=None):
    """``nu S_t + h X_t`` for grid paths; ``sup`` overrides the grid maximum."""
    values = np.asarray(values, dtype=float)
    S = values.max(axis=-1) if sup is None else np.asarray(sup)
    out = nu * S + h * values[..., -1]
    return out if np.ndim(out) else float(out)


def _log_moment(k):
    """``log int_0^inf w exp(k w - w^2/2) dw`` in closed form, vectorised."""
    k = np.asarray(k, dtype=float)
    with np.errstate(all="ignore"):
        neg = np.log(np.maximum(1 + k * np.sqrt(np.pi / 2) * special.erfcx(-k / np.sqrt(2)), 1e-300))
        pos = 0.5 * k * k + np.log(np.exp(-0.5 * k * k) + k * np.sqrt(2 * np.pi) * special.ndtr(k))
    return np.where(k <= 0, neg, pos)


def _tilted_rayleigh_cdf(W, k):
    """Normalized cdf of the density proportional to ``w exp(k w - w^2/2)`` on ``w > 0``."""
    with np.errstate(all="ignore"):
        E = np.exp(k * W - 0.5 * W * W)
        c = np.sqrt(np.pi / 2)
        num_neg = 1 - E + k * c * (special.erfcx(-k / np.sqrt(2)) - E * special.erfcx((W - k) / np.sqrt(2)))
        tot_neg = 1 + k * c * special.erfcx(-k / np.sqrt(2))
        ek = np.exp(-0.5 * k * k)
        num_pos = ek - np.exp(-0.5 * (W - k) ** 2) + k * np.sqrt(2 * np.pi) * (special.ndtr(W - k) - special.ndtr(-k))
        tot_pos = ek + k * np.sqrt(2 * np.pi) * special.ndtr(k)
    return np.where(k <= 0, num_neg / tot_neg, num_pos / tot_pos)


def sample_tilted_rayleigh(gen, k) -> np.ndarray:
    """Draws from the density proportional to ``w exp(k w - w^2/2)``, one per entry of ``k``."""
    k = np.asarray(k, dtype=float)
    u = gen.random(k.shape)
    hi = np.maximum(k, 0.0) + 12.0
    res = elementwise.find_root(lambda w, kk, uu: _tilted_rayleigh_cdf(w, kk) - uu,
                                (np.zeros_like(k), hi), args=(k, u),
                                tolerances={"xatol": 1e-13, "xrtol": 1e-13})
    return res.x


@dataclass(frozen=True)
class ExtremaProposal:
    """Exact sampler of ``Q_t^{nu,h}`` built from the joint law of the extremes.

    Under ``P_0`` the path splits at its maximum into two Bessel(3) bridges
    given ``(S_t, S_t - X_t, Theta_t)``, and the Gibbs weight depends only on that
    triple.  The tilted triple is drawn as: ``Theta_t / t = sin^2(theta)`` from a
    tabulated density on ``theta``, then ``S_t`` and ``S_t - X_t`` from tilted
    Rayleigh laws.  All draws carry the same log weight ``log E_0[Gamma_t]``.
    """

    grid: int = 2**14
    kind: str = field(default="extrema", init=False)

    def describe(self) -> dict:
        return {"kind": self.kind, "grid": self.grid}

    def _theta_table(self, a, c):
        th = np.linspace(0.0, np.pi / 2, self.grid + 1)
        lg = _log_moment(a * np.sin(th)) + _log_moment(c * np.cos(th))
        dens = np.exp(lg - lg.max())
        cdf = integrate.cumulative_trapezoid(dens, th, initial=0.0)
        return th, cdf / cdf[-1]

    def draw(self, gen, n: int, nu: float, h: float, t: float, m: int) -> Draw:
        rt = math.sqrt(t)
        a, c = rt * (nu + h), -rt * h
        th_grid, cdf = self._theta_table(a, c)
        th = np.interp(gen.random(n), cdf, th_grid)
        th = np.clip(th, 1e-9, np.pi / 2 - 1e-9)
        sn, cs = np.sin(th), np.cos(th)
        S = rt * sn * sample_tilted_rayleigh(gen, a * sn)
        Y = rt * cs * sample_tilted_rayleigh(gen, c * cs)
        theta = t * sn**2
        s = np.linspace(0.0, t, m + 1)[None, :]
        pre = bessel3_bridge_at(gen, np.broadcast_to(s, (n, m + 1)), theta, S, 0.0)
        post = bessel3_bridge_at(gen, np.maximum(s - theta[:, None], 0.0), t - theta, 0.0, Y)
        values = S[:, None] - np.where(s <= theta[:, None], pre, post)
        values[:, 0] = 0.0
        lw = np.full(n, exact_partition(nu, h, t))
        return Draw(PathBatch(values, t, S, theta), lw)


def make_proposal(region, nu: float, h: float):
    """Drift proposal adapted to the phase region.

    L1, R1, L2 use no drift; R2 uses ``nu + h``; R3 uses ``h``; L3 switches from
    ``-h`` to ``h`` at a uniform time, matching the up-down limit shape.
    """
    region = PhaseRegion(region)
    if region in (PhaseRegion.L1, PhaseRegion.R1, PhaseRegion.L2):
        return Proposal.constant(0.0)
    if region is PhaseRegion.R2:
        return Proposal.constant(nu + h)
    if region is PhaseRegion.R3:
        return Proposal.constant(h)
    return Proposal.switching(-h, h)


# ---------------------------------------------------------------------------
# estimators

@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int
    ess: float
    truncation_flags: int = 0
    low_ess: bool = False


@dataclass(frozen=True)
class PartitionEstimate:
    log_mean: float
    rel_se: float
    n: int
    ess: float


@dataclass(frozen=True, eq=False)
class WeightedDraws:
    """Log weights and functional values from one estimator run."""

    log_weight: np.ndarray
    values: dict
    truncation_flags: int = 0

    @property
    def n(self) -> int:
        return self.log_weight.size

    def sample(self, name) -> WeightedSample:
        return WeightedSample.from_log_weights(self.values[name], self.log_weight)

    @property
    def ess(self) -> float:
        w = np.exp(self.log_weight - self.log_weight.max())
        return float(w.sum() ** 2 / (w**2).sum())

    def estimate(self, name) -> Estimate:
        s = self.sample(name)
        return Estimate(s.mean(), s.std_error(), self.n, s.ess, self.truncation_flags,
                        s.ess < 0.01 * self.n)

    def partition(self) -> PartitionEstimate:
        lw = self.log_weight
        top = lw.max()
        w = np.exp(lw - top)
        mw = w.mean()
        rel = w.std(ddof=1) / (mw * math.sqrt(w.size))
        return PartitionEstimate(float(top + math.log(mw)), float(rel), w.size, self.ess)


def _as_functionals(F) -> dict:
    if isinstance(F, PathFunctional):
        return {F.name: F}
    if isinstance(F, dict):
        return dict(F)
    return {f.name: f for f in F}


def draw_weighted(F, nu: float, h: float, t: float, proposal, n: int, rng=0,
                  m: int = DEFAULT_M, chunk: int = 500, workers=None) -> WeightedDraws:
    """Draw ``n`` proposal paths in fixed chunks and evaluate the functionals.

    Chunk ``c`` uses the stream ``(seed, c)`` of the given :class:`RngStream` (or
    integer seed), so results do not depend on the worker count.
    """
    if n < 1:
        raise ValueError("n must be positive")
    funcs = _as_functionals(F)
    base = rng if isinstance(rng, RngStream) else RngStream(int(rng), 0)
    sizes = [min(chunk, n - s) for s in range(0, n, chunk)]

    def job(c):
        gen = base.generator(c)
        d = proposal.draw(gen, sizes[c], nu, h, t, m)
        return d.log_weight, {k: f(d.batch) for k, f in funcs.items()}

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(sizes) == 1:
        parts = [job(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    lw = np.concatenate([p[0] for p in parts])
    vals = {k: np.concatenate([p[1][k] for p in parts]) for k in funcs}
    bad = ~np.isfinite(lw)
    for k in vals:
        bad |= ~np.isfinite(vals[k])
    flags = int(bad.sum())
    if flags:
        log.warning("%d draws with non-finite weight or value were dropped", flags)
        lw = lw[~bad]
        vals = {k: v[~bad] for k, v in vals.items()}
    return WeightedDraws(lw, vals, flags)


def estimate_penalized(F: PathFunctional, nu: float, h: float, t: float, proposal=None,
                       n: int = 10_000, rng=0, m: int = DEFAULT_M, **kw) -> Estimate:
    """Self-normalized estimate of ``Q_t^{nu,h}[F]``."""
    if n < 100:
        raise ValueError("need at least 100 draws")
    if proposal is None:
        proposal = make_proposal(classify(nu, h), nu, h)
    d = draw_weighted(F, nu, h, t, proposal, n, rng, m, **kw)
    est = d.estimate(F.name)
    if est.low_ess:
        log.warning("effective sample size %.1f is below 1%% of n=%d", est.ess, n)
    return est


def estimate_partition(nu: float, h: float, t: float, proposal=None, n: int = 10_000, rng=0,
                       m: int = DEFAULT_M, **kw) -> PartitionEstimate:
    """Unnormalized mean weight, i.e. a Monte Carlo estimate of ``log E_0[Gamma_t]``."""
    if proposal is None:
        proposal = make_proposal(classify(nu, h), nu, h)
    return draw_weighted(constant(1.0), nu, h, t, proposal, n, rng, m, **kw).partition()


# ---------------------------------------------------------------------------
# verification reports and theorem experiments

@dataclass
class VerificationReport:
    experiment: str
    region: str | None
    nu: float | None
    h: float | None
    t: float | None
    n: int
    statistic: float
    threshold: float
    passed: bool
    ess: float
    seed: int
    runtime_ms: float | None = None
    p_value: float | None = None
    detail: str = ""
    gating: bool = True  # False for informational rows that do not decide the verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        for k, v in d.items():
            if isinstance(v, (np.floating, np.integer)):
                d[k] = v.item()
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class TheoremSpec:
    theorem: str  # "1.1", "1.2" or "1.3"
    nu: float
    h: float
    t_ladder: tuple = (25.0, 50.0, 100.0, 200.0)
    n: int = 10_000
    m: int = DEFAULT_M
    proposal: str = "auto"  # "auto", "drift" or "extrema"
    level: float = 0.01

    @property
    def region(self) -> PhaseRegion:
        return classify(self.nu, self.h)


@dataclass(frozen=True)
class _Check:
    name: str
    functional: PathFunctional
    kind: str  # "ks" or "mean-below"
    reference: object = None
    threshold: float = 0.0


def _neg_rayleigh_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, np.exp(-(x**2) / 2), 1.0)


def _neg_maxwell_cdf(scale):
    ref = stats.maxwell(scale=scale)
    return lambda x: ref.sf(-np.asarray(x, dtype=float))


def designated_checks(theorem: str, nu: float, h: float) -> list:
    """Designated statistics for each theorem and phase region."""
    r = classify(nu, h)
    if theorem == "1.1":
        if r is PhaseRegion.L1:
            return [_Check("endpoint-vs-neg-meander", scaled_endpoint(0.5), "ks", _neg_rayleigh_cdf)]
        if r is PhaseRegion.R1:
            # the excursion at time 1/2 is the norm of a 3D Gaussian with variance 1/4
            return [_Check("midpoint-vs-neg-excursion", scaled_value(0.5, 0.5), "ks",
                           _neg_maxwell_cdf(0.5)),
                    _Check("abs-endpoint-small", PathFunctional(
                        lambda b: np.abs(b.values[:, -1]) / np.sqrt(b.t), "abs-endpoint"),
                        "mean-below", threshold=0.15)]
        if r is PhaseRegion.L2:
            return [_Check("endpoint-vs-ascent", scaled_endpoint(0.5), "ks",
                           densities.meander_endpoint_density())]
        if r is PhaseRegion.R2:
            return [_Check("supdist-to-line", sup_distance_to_line(nu + h), "mean-below",
                           threshold=0.1)]
        if r is PhaseRegion.R3:
            return [_Check("supdist-to-line", sup_distance_to_line(h), "mean-below", threshold=0.1)]
        return [_Check("argmax-uniform", argmax_fraction(), "ks", densities.uniform_density(0, 1)),
                _Check("endpoint-uniform", scaled_endpoint(1.0), "ks",
                       densities.uniform_density(h, -h))]
    if theorem == "1.2":
        if r is PhaseRegion.R2:
            return [_Check("centered-endpoint-normal", centered_endpoint(nu + h), "ks",
                           densities.normal_density())]
        if r is PhaseRegion.R3:
            return [_Check("centered-endpoint-normal", centered_endpoint(h), "ks",
                           densities.normal_density())]
        raise ValueError("the centered limit under Q_t applies to R2 and R3")
    if theorem == "1.3":
        if r is not PhaseRegion.L3:
            raise ValueError("the random centering applies to L3 only")
        return [_Check("random-centered-endpoint-normal", random_centered_endpoint(h), "ks",
                       densities.normal_density())]
    raise ValueError(f"unknown theorem {theorem!r}")


def _run_check(chk: _Check, draws: WeightedDraws, level: float):
    s = draws.sample(chk.name)
    if chk.kind == "ks":
        res = ks_one_sample(s, chk.reference)
        return res.statistic, level, res.p_value >= level, res.p_value, s.ess
    mu = s.mean()
    return mu, chk.threshold, mu < chk.threshold, None, s.ess


def run_theorem_experiment(spec: TheoremSpec, seed: int = 0, workers=None,
                           timer=time.perf_counter) -> list[VerificationReport]:
    """Run the designated checks along the horizon ladder.

    One report per (check, t) plus one trend report per check.  A check passes
    overall when it passes at the largest horizon and its statistic is
    nonincreasing along the ladder up to the 5% KS critical value (or two
    standard errors for mean checks).  Rows for horizons below the largest are
    informational (``gating=False``).
    """
    region = spec.region
    name = f"theorem-{spec.theorem}/{region.value}"
    checks = designated_checks(spec.theorem, spec.nu, spec.h)
    funcs = {c.name: c.functional for c in checks}
    reports, series = [], {c.name: [] for c in checks}
    for i, t in enumerate(spec.t_ladder):
        start = timer()
        stream = RngStream(seed, zlib.crc32(f"{name}/{i}".encode()))
        if spec.proposal == "extrema":
            prop = ExtremaProposal()
        else:
            prop = make_proposal(region, spec.nu, spec.h)
        draws = draw_weighted(funcs, spec.nu, spec.h, t, prop, spec.n, stream, spec.m,
                              workers=workers)
        note = f"proposal={prop.kind}"
        if spec.proposal == "auto" and draws.ess < 0.01 * draws.n:
            note = f"drift ess={draws.ess:.1f} below 1% of n; proposal=extrema"
            prop = ExtremaProposal()
            draws = draw_weighted(funcs, spec.nu, spec.h, t, prop, spec.n, stream, spec.m,
                                  workers=workers)
        elapsed = (timer() - start) * 1e3
        for c in checks:
            stat, thr, ok, p, ess = _run_check(c, draws, spec.level)
            se = draws.sample(c.name).std_error()
            series[c.name].append((stat, ess, se))
            reports.append(VerificationReport(
                f"{name}/{c.name}", region.value, spec.nu, spec.h,
                float(t), draws.n, float(stat), float(thr), bool(ok), float(ess), seed, elapsed,
                None if p is None else float(p), note, gating=i == len(spec.t_ladder) - 1))
    for c in checks:
        st = series[c.name]
        stat_vals = [x[0] for x in st]
        if c.kind == "ks":
            slack = [ks_critical_value(x[1], 0.05) for x in st]
        else:
            slack = [2 * x[2] for x in st]
        trend_ok = all(stat_vals[j + 1] <= stat_vals[j] + slack[j + 1] for j in range(len(st) - 1))
        last = [r for r in reports if r.experiment.endswith("/" + c.name)][-1]
        reports.append(VerificationReport(
            f"{name}/{c.name}/trend", region.value, spec.nu,
            spec.h, None, spec.n, float(stat_vals[-1]), float(last.threshold),
            bool(trend_ok and last.passed), float(st[-1][1]), seed, None, last.p_value,
            "statistics along ladder: " + ", ".join(f"{v:.4g}" for v in stat_vals)))
    return reports
