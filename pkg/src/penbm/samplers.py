"""Samplers for Brownian path fragments and the penalized-path constructions.

Every sampler takes an ``rng`` (an :class:`RngStream`, a numpy ``Generator`` or an
integer seed), an optional batch size ``n`` and a grid size ``m``.  With ``n=None``
a single :class:`~penbm.paths.Path` is returned; otherwise a batch of shape
``(n, m + 1)``.  All constructions are exact at the grid points except where
noted (Denisov ascent, co-ascent and pseudo-bridge simulate Brownian motion on a
finer grid and locate the relevant random time by interpolation).
"""
from __future__ import annotations

import enum
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .paths import DEFAULT_GRID, Path, reverse_increments, updown_values, write_csv

log = logging.getLogger(__name__)

SQRT_HALF_PI = np.sqrt(np.pi / 2)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Streams with the same seed and different ids are derived with numpy's
    ``SeedSequence`` spawn keys, so they are statistically independent.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *subkey: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *subkey))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, j: int) -> "RngStream":
        """Independent stream for a sub-task (ids are mixed, not added)."""
        mixed = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, j))
        return RngStream(self.seed, int(mixed.generate_state(1, np.uint64)[0]))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def _finish(values, duration, n):
    p = Path(values, duration)
    return p if n is not None else Path(p.values[0], duration)


def _nn(n):
    return 1 if n is None else int(n)


# ---------------------------------------------------------------------------
# Gaussian building blocks

def bm_values(gen, shape, t, m, h=0.0) -> np.ndarray:
    """Brownian motion with drift on ``m`` equal steps of ``[0, t]``; shape ``shape + (m+1,)``."""
    dt = t / m
    z = gen.standard_normal(tuple(shape) + (m,))
    out = np.zeros(tuple(shape) + (m + 1,))
    np.cumsum(z * np.sqrt(dt) + h * dt, axis=-1, out=out[..., 1:])
    return out


def bm_at_times(gen, times) -> np.ndarray:
    """Standard BM from 0 evaluated at nondecreasing times (last axis), any batch shape."""
    times = np.asarray(times, dtype=float)
    dts = np.diff(times, axis=-1, prepend=0.0)
    if np.any(dts < -1e-15):
        raise ValueError("times must be nondecreasing and nonnegative")
    z = gen.standard_normal(times.shape)
    return np.cumsum(z * np.sqrt(np.maximum(dts, 0.0)), axis=-1)


def bridge_values(gen, shape, T, m, a=0.0, b=0.0) -> np.ndarray:
    """Brownian bridge from ``a`` to ``b`` over ``[0, T]`` on ``m`` steps."""
    w = bm_values(gen, shape, T, m)
    s = np.linspace(0.0, 1.0, m + 1)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    out = w - s * w[..., -1:] + a + (b - a) * s
    out[..., 0] = a[..., 0]
    out[..., -1] = b[..., 0]
    return out


def bessel3_bridge_values(gen, n, x, y, T, m) -> np.ndarray:
    """Bessel(3) bridge from ``x`` to ``y`` via three independent 0-to-0 Brownian bridges.

    ``x`` and ``y`` may be scalars or arrays of length ``n`` (one endpoint pair per path).
    """
    b = bridge_values(gen, (3, n), T, m)
    s = np.linspace(0.0, 1.0, m + 1)
    x = np.broadcast_to(np.asarray(x, dtype=float), (n,))[:, None]
    y = np.broadcast_to(np.asarray(y, dtype=float), (n,))[:, None]
    line = x + (y - x) * s
    return np.sqrt((line + b[0]) ** 2 + b[1] ** 2 + b[2] ** 2)


def bessel3_bridge_at(gen, r, T, x0, x1) -> np.ndarray:
    """Bessel(3) bridge from ``x0`` to ``x1`` over ``[0, T]`` at per-path times ``r``.

    ``r`` has shape ``(n, K)`` and is nondecreasing along the last axis; values are
    clipped to ``[0, T]``.  ``T``, ``x0`` and ``x1`` are scalars or length-``n`` arrays.
    """
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    T = np.broadcast_to(np.asarray(T, dtype=float), (n,))[:, None]
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n,))[:, None]
    x1 = np.broadcast_to(np.asarray(x1, dtype=float), (n,))[:, None]
    rc = np.clip(r, 0.0, T)
    times = np.concatenate([rc, T], axis=1)
    w = bm_at_times(gen, np.broadcast_to(times, (3,) + times.shape))
    frac = rc / T
    b = w[..., :-1] - frac * w[..., -1:]
    line = x0 + (x1 - x0) * frac
    return np.sqrt((line + b[0]) ** 2 + b[1] ** 2 + b[2] ** 2)


def cell_max(gen, values, dt) -> np.ndarray:
    """Exact maxima of the Brownian bridges joining consecutive grid values.

    Returns an array with one entry per grid cell, shape ``values.shape[:-1] + (m,)``.
    Uses the bridge-maximum law ``P(M > c) = exp(-2 (c - a)(c - b) / dt)``.
    """
    a = values[..., :-1]
    b = values[..., 1:]
    e = -np.log1p(-gen.random(a.shape))  # Exp(1), avoids log(0)
    return 0.5 * (a + b + np.sqrt((b - a) ** 2 + 2.0 * dt * e))


def refined_max(gen, p: Path):
    """Running-maximum refinement: exact continuous max of a grid path given its grid values."""
    return cell_max(gen, p.values, p.dt).max(axis=-1)


# ---------------------------------------------------------------------------
# elementary samplers

def sample_bm(rng, t=1.0, h=0.0, m=DEFAULT_GRID, n=None) -> Path:
    if not t > 0:
        raise ValueError("t must be positive")
    gen = as_generator(rng)
    return _finish(bm_values(gen, (_nn(n),), t, m, h), t, n)


def sample_bridge(rng, a=0.0, b=0.0, T=1.0, m=DEFAULT_GRID, n=None) -> Path:
    if not T > 0:
        raise ValueError("T must be positive")
    gen = as_generator(rng)
    return _finish(bridge_values(gen, (_nn(n),), T, m, a, b), T, n)


def sample_bessel3(rng, x=0.0, t=1.0, m=DEFAULT_GRID, n=None) -> Path:
    """Norm of a 3D Brownian motion started at ``(x, 0, 0)``."""
    if x < 0:
        raise ValueError("Bessel(3) starting point must be nonnegative")
    gen = as_generator(rng)
    w = bm_values(gen, (3, _nn(n)), t, m)
    w[0] += x
    return _finish(np.sqrt((w**2).sum(axis=0)), t, n)


def sample_bessel3_bridge(rng, x=0.0, y=0.0, T=1.0, m=DEFAULT_GRID, n=None) -> Path:
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
        raise ValueError("Bessel(3) bridge endpoints must be nonnegative")
    gen = as_generator(rng)
    return _finish(bessel3_bridge_values(gen, _nn(n), x, y, T, m), T, n)


def sample_excursion(rng, m=DEFAULT_GRID, n=None) -> Path:
    """Normalized excursion: Bessel(3) bridge from 0 to 0 of unit length."""
    return sample_bessel3_bridge(rng, 0.0, 0.0, 1.0, m, n)


def sample_meander(rng, m=DEFAULT_GRID, n=None) -> Path:
    """Meander as a Bessel(3) bridge from 0 to a Rayleigh endpoint."""
    gen = as_generator(rng)
    rho = np.sqrt(2.0 * gen.standard_exponential(_nn(n)))
    return _finish(bessel3_bridge_values(gen, _nn(n), 0.0, rho, 1.0, m), 1.0, n)


def sample_co_meander(rng, m=DEFAULT_GRID, n=None) -> Path:
    """Co-meander as a Bessel(3) bridge from 0 to a half-normal endpoint."""
    gen = as_generator(rng)
    rho = np.abs(gen.standard_normal(_nn(n)))
    return _finish(bessel3_bridge_values(gen, _nn(n), 0.0, rho, 1.0, m), 1.0, n)


def sample_updown(rng, slope=1.0, m=DEFAULT_GRID, n=None, return_switch=False):
    """Up-down process ``slope * u^U`` with a uniform switch time ``U``."""
    gen = as_generator(rng)
    u = gen.random(_nn(n))
    p = _finish(slope * updown_values(u, m), 1.0, n)
    if return_switch:
        return p, (u if n is not None else float(u[0]))
    return p


# ---------------------------------------------------------------------------
# ascent and co-ascent

class AscentMethod(str, enum.Enum):
    FROM_MEANDER = "from-meander"
    DENISOV = "denisov"
    CO_ASCENT_REWEIGHT = "co-ascent-reweight"


def _rescale_prefix(vals, end_idx, end_time, end_value, dt, m):
    """Rescale ``X_{s T}/sqrt(T)`` onto ``m`` steps for per-path prefixes.

    Row ``i`` uses grid values ``vals[i, :end_idx[i] + 1]`` followed by the extra
    point ``(end_time[i], end_value[i])``; ``end_time`` lies in
    ``[end_idx * dt, (end_idx + 1) * dt]``.
    """
    n = vals.shape[0]
    s = np.linspace(0.0, 1.0, m + 1)
    q = s[None, :] * end_time[:, None] / dt
    k = np.minimum(np.floor(q).astype(np.int64), end_idx[:, None])
    rows = np.arange(n)[:, None]
    v0 = vals[rows, k]
    nxt = np.minimum(k + 1, vals.shape[1] - 1)
    v1 = np.where(k + 1 <= end_idx[:, None], vals[rows, nxt], end_value[:, None])
    t1 = np.where(k + 1 <= end_idx[:, None], (k + 1) * dt, end_time[:, None])
    t0 = k * dt
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(t1 > t0, (q * dt - t0) / (t1 - t0), 0.0)
    out = v0 + np.clip(frac, 0.0, 1.0) * (v1 - v0)
    out[:, -1] = end_value
    return out / np.sqrt(end_time)[:, None]


def _blocked(fn, n, per_row):
    """Call ``fn(k)`` on consecutive blocks of rows so that each block holds about
    2**24 fine-grid values; results are concatenated in order."""
    block = max(1, 2**24 // per_row)
    return [fn(min(block, n - s)) for s in range(0, n, block)]


def _denisov(gen, n, m, m_sim):
    return np.concatenate(_blocked(lambda k: _denisov_block(gen, k, m, m_sim), n, m_sim))


def _denisov_block(gen, n, m, m_sim):
    w = bm_values(gen, (n,), 1.0, m_sim)
    dt = 1.0 / m_sim
    cm = cell_max(gen, w, dt)
    k = np.argmax(cm, axis=-1)
    smax = cm[np.arange(n), k]
    theta = (k + 0.5) * dt
    return _rescale_prefix(w, k, theta, smax, dt, m)


def _first_passage(gen, n, level, m_sim, t0, cap):
    """Brownian paths run to the first passage at ``level`` by horizon doubling.

    The current horizon ``T`` always carries ``m_sim`` steps.  If no path crossed,
    every other grid point is dropped (exact subsampling of BM) and ``m_sim / 2``
    fresh steps extend the path to ``2T``.  The crossing time is located by linear
    interpolation in the first cell reaching the level, so relative resolution is
    at least ``m_sim / 2`` steps per path.  Paths still unfinished at ``cap`` are
    redrawn; the number of redraws is returned.
    """
    half = m_sim // 2
    vals = np.empty((n, m_sim + 1))
    tau = np.empty(n)
    idx = np.empty(n, dtype=np.int64)
    horizon = np.empty(n)
    todo = np.arange(n)
    restarts = 0
    while todo.size:
        T = t0
        cur = bm_values(gen, (todo.size,), T, m_sim)
        active = np.arange(todo.size)
        while active.size:
            hit = cur[active] >= level
            done = hit.any(axis=-1)
            if done.any():
                rows = active[done]
                j = np.argmax(hit[done], axis=-1)
                v0 = cur[rows, j - 1]
                v1 = cur[rows, j]
                dt = T / m_sim
                frac = (level - v0) / (v1 - v0)
                dest = todo[rows]
                vals[dest] = cur[rows]
                tau[dest] = (j - 1 + frac) * dt
                idx[dest] = j - 1
                horizon[dest] = T
                active = active[~done]
            if not active.size:
                break
            if 2 * T > cap:
                restarts += active.size
                break
            sub = cur[active][:, ::2]
            ext = bm_values(gen, (active.size,), T, half) + sub[:, -1:]
            cur[active] = np.concatenate([sub, ext[:, 1:]], axis=1)
            T *= 2
        todo = todo[active] if active.size else todo[:0]
    return vals, idx, tau, horizon / m_sim, restarts


def sample_co_ascent(rng, m=DEFAULT_GRID, n=None, m_sim=2**13, cap=1e8, t0=1e-2,
                     return_stats=False):
    """Co-ascent ``X_{s tau_1} / sqrt(tau_1)`` from first-passage simulation.

    Returns ``(path, tau_1)``, plus a dict with the restart count when
    ``return_stats`` is set.  The start horizon ``t0 = 0.01`` misses the passage
    with probability below 1e-20; ``cap`` bounds the horizon
    (``P(tau_1 > 1e8)`` is about 8e-5).
    """
    gen = as_generator(rng)
    nn = _nn(n)

    def block(k):
        vals, idx, tau, dts, restarts = _first_passage(gen, k, 1.0, m_sim, t0, cap)
        out = np.empty((k, m + 1))
        # rows have different steps dts; rescale each group sharing a step
        for d in np.unique(dts):
            sel = dts == d
            out[sel] = _rescale_prefix(vals[sel], idx[sel], tau[sel], np.ones(sel.sum()), d, m)
        return out, tau, restarts

    parts = _blocked(block, nn, m_sim)
    out = np.concatenate([q[0] for q in parts])
    tau = np.concatenate([q[1] for q in parts])
    restarts = sum(q[2] for q in parts)
    if restarts:
        log.info("co-ascent: %d draws exceeded the horizon cap %.3g and were redrawn",
                 restarts, cap)
    p = _finish(out, 1.0, n)
    tau_out = tau if n is not None else float(tau[0])
    if return_stats:
        return p, tau_out, {"restarts": restarts, "cap": cap}
    return p, tau_out


def sample_ascent(rng, method=AscentMethod.FROM_MEANDER, m=DEFAULT_GRID, n=None,
                  m_sim=2**15):
    """Brownian ascent by one of three constructions.

    ``from-meander``
        ``m_1 - m_{1-s}`` for a meander ``m``.
    ``denisov``
        Pre-maximum segment of a Brownian path on ``[0, 1]`` rescaled to unit
        length, ``W_{s Theta} / sqrt(Theta)``.  The path is simulated on ``m_sim``
        steps; the maximum is refined exactly inside each cell and placed at the
        midpoint of the winning cell.
    ``co-ascent-reweight``
        A co-ascent path with importance weight ``sqrt(pi/2) / sqrt(tau_1)``;
        returns ``(path, weights)``.
    """
    method = AscentMethod(method)
    gen = as_generator(rng)
    if method is AscentMethod.FROM_MEANDER:
        return reverse_increments(sample_meander(gen, m, n))
    if method is AscentMethod.DENISOV:
        return _finish(_denisov(gen, _nn(n), m, m_sim), 1.0, n)
    p, tau = sample_co_ascent(gen, m, n)
    return p, SQRT_HALF_PI / np.sqrt(tau)


# ---------------------------------------------------------------------------
# decompositions at the global maximum

def _max_decomposition(gen, n, level, tau, t, m, drift):
    """Path equal to ``level - R'`` before ``tau`` and ``level - Y`` after it.

    ``R'`` is a Bessel(3) bridge from ``level`` to 0 over ``[0, tau]`` (the
    reversed first-passage bridge) and ``Y`` is the norm of a 3D Brownian motion
    with drift ``drift * e_1`` started at 0 at time ``tau``.
    """
    s = np.linspace(0.0, t, m + 1)
    dt = t / m
    level = level[:, None]
    tau_c = tau[:, None]
    # pre-maximum: bridges over [0, tau] sampled at grid times below tau
    w = bm_values(gen, (3, n), t, m)
    K = np.minimum(np.floor(tau / dt).astype(np.int64), m)
    wK = w[:, np.arange(n), K]
    wtau = wK + np.sqrt(np.maximum(tau - K * dt, 0.0)) * gen.standard_normal((3, n))
    b = w - (s / tau_c) * wtau[..., None]
    pre = np.sqrt((level * (1 - s / tau_c) + b[0]) ** 2 + b[1] ** 2 + b[2] ** 2)
    # post-maximum: drifted 3D BM started at the passage time
    d = np.maximum(s - tau_c, 0.0)
    post3 = bm_at_times(gen, np.broadcast_to(d, (3, n, m + 1)))
    post3[0] += drift * d
    post = np.sqrt((post3**2).sum(axis=0))
    return np.where(s <= tau_c, level - pre, level - post)


def sample_williams_drift(rng, h, t=1.0, m=DEFAULT_GRID, n=None):
    """Brownian motion with drift ``h < 0`` built from Williams' decomposition.

    The level ``l`` is Exponential(-2h); the pre-maximum part is drift ``-h``
    Brownian motion up to its passage time at ``l`` (inverse Gaussian, then a
    first-passage bridge); the post-maximum part is ``l`` minus a Brownian motion
    with drift ``-h`` conditioned to stay positive, which is the norm of a 3D
    Brownian motion with drift ``|h|``.  Returns ``(path, S_inf, Theta_inf)``.
    """
    if not h < 0:
        raise ValueError("Williams decomposition requires h < 0")
    gen = as_generator(rng)
    nn = _nn(n)
    lvl = gen.exponential(-1.0 / (2 * h), nn)
    tau = gen.wald(lvl / -h, lvl**2)
    vals = _max_decomposition(gen, nn, lvl, tau, t, m, -h)
    p = _finish(vals, t, n)
    if n is None:
        return p, float(lvl[0]), float(tau[0])
    return p, lvl, tau


def sample_qnu_path(rng, nu, t=1.0, m=DEFAULT_GRID, n=None):
    """Path under the limiting penalized measure for ``h = 0`` and ``nu < 0``.

    ``S_inf`` is Exponential(-nu); Brownian motion runs to its first passage at
    ``S_inf`` and then ``S_inf`` minus an independent Bessel(3) process from 0.
    The infinite path is truncated to ``[0, t]``.  Returns ``(path, S_inf, tau)``.
    """
    if not nu < 0:
        raise ValueError("penalized path requires nu < 0")
    gen = as_generator(rng)
    nn = _nn(n)
    lvl = gen.exponential(-1.0 / nu, nn)
    tau = lvl**2 / gen.standard_normal(nn) ** 2
    vals = _max_decomposition(gen, nn, lvl, tau, t, m, 0.0)
    p = _finish(vals, t, n)
    if n is None:
        return p, float(lvl[0]), float(tau[0])
    return p, lvl, tau


# ---------------------------------------------------------------------------
# experimental

def sample_pseudo_bridge(rng, m=DEFAULT_GRID, n=None, dt_sim=1e-4, eps=0.05,
                         horizon_cap=100.0, block=2**14):
    """Experimental pseudo-bridge ``X_{s l_1} / sqrt(l_1)``.

    The local time at 0 is approximated by the occupation estimator
    ``Leb{u <= s: |X_u| <= eps} / (2 eps)`` on a grid of step ``dt_sim``, and
    ``l_1`` is the first grid time it reaches 1.  Draws exceeding
    ``horizon_cap`` are redrawn, which biases the law toward short ``l_1``.
    Returns ``(path, l_1, restarts)``.
    """
    gen = as_generator(rng)
    nn = _nn(n)
    out = np.empty((nn, m + 1))
    ell = np.empty(nn)
    restarts = 0
    s = np.linspace(0.0, 1.0, m + 1)
    for i in range(nn):
        while True:
            chunks, x0, lt, found = [np.zeros(1)], 0.0, 0.0, None
            steps = 0
            while steps * dt_sim < horizon_cap:
                w = x0 + np.cumsum(gen.standard_normal(block)) * np.sqrt(dt_sim)
                occ = lt + np.cumsum(np.abs(w) <= eps) * dt_sim / (2 * eps)
                chunks.append(w)
                if occ[-1] >= 1.0:
                    found = steps + int(np.argmax(occ >= 1.0)) + 1
                    break
                x0, lt, steps = w[-1], occ[-1], steps + block
            if found is not None:
                break
            restarts += 1
        full = np.concatenate(chunks)[: found + 1]
        T = found * dt_sim
        out[i] = np.interp(s * T, np.arange(found + 1) * dt_sim, full) / np.sqrt(T)
        ell[i] = T
    return _finish(out, 1.0, n), (ell if n is not None else float(ell[0])), restarts


# ---------------------------------------------------------------------------
# dispatch and batch output

class FragmentKind(str, enum.Enum):
    BM = "bm"
    BM_DRIFT = "bm-drift"
    BRIDGE = "bridge"
    BESSEL3 = "bessel3"
    BESSEL3_BRIDGE = "bessel3-bridge"
    MEANDER = "meander"
    CO_MEANDER = "co-meander"
    EXCURSION = "excursion"
    ASCENT = "ascent"
    CO_ASCENT = "co-ascent"
    PSEUDO_BRIDGE = "pseudo-bridge"
    UPDOWN = "updown"
    QNU_PATH = "qnu-path"
    WILLIAMS_DRIFT = "williams-drift"


# parameters each kind accepts, with defaults
KIND_PARAMS = {
    FragmentKind.BM: {"t": 1.0},
    FragmentKind.BM_DRIFT: {"t": 1.0, "h": 0.0},
    FragmentKind.BRIDGE: {"a": 0.0, "b": 0.0, "T": 1.0},
    FragmentKind.BESSEL3: {"x": 0.0, "t": 1.0},
    FragmentKind.BESSEL3_BRIDGE: {"x": 0.0, "y": 0.0, "T": 1.0},
    FragmentKind.MEANDER: {},
    FragmentKind.CO_MEANDER: {},
    FragmentKind.EXCURSION: {},
    FragmentKind.ASCENT: {"method": "from-meander"},
    FragmentKind.CO_ASCENT: {},
    FragmentKind.PSEUDO_BRIDGE: {"eps": 0.05, "dt_sim": 1e-4},
    FragmentKind.UPDOWN: {"h": 1.0},
    FragmentKind.QNU_PATH: {"nu": -1.0, "t": 1.0},
    FragmentKind.WILLIAMS_DRIFT: {"h": -1.0, "t": 1.0},
}


def resolve_params(kind, params: dict) -> dict:
    kind = FragmentKind(kind)
    allowed = KIND_PARAMS[kind]
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(f"{kind.value} does not take parameter(s) {sorted(unknown)}")
    full = {**allowed, **params}
    if kind is FragmentKind.WILLIAMS_DRIFT and not full["h"] < 0:
        raise ValueError("williams-drift requires h < 0")
    if kind is FragmentKind.QNU_PATH and not full["nu"] < 0:
        raise ValueError("qnu-path requires nu < 0")
    if kind is FragmentKind.ASCENT:
        AscentMethod(full["method"])
    for key in ("t", "T"):
        if key in full and not float(full[key]) > 0:
            raise ValueError(f"{key} must be positive")
    for key in ("x", "y"):
        if key in full and float(full[key]) < 0:
            raise ValueError(f"{key} must be nonnegative")
    return full


def sample_fragment(kind, rng, n, m=DEFAULT_GRID, **params):
    """Sample ``n`` paths of the given kind.  Returns ``(path, weights or None)``."""
    kind = FragmentKind(kind)
    p = resolve_params(kind, params)
    K = FragmentKind
    if kind in (K.BM, K.BM_DRIFT):
        return sample_bm(rng, p["t"], p.get("h", 0.0), m, n), None
    if kind is K.BRIDGE:
        return sample_bridge(rng, p["a"], p["b"], p["T"], m, n), None
    if kind is K.BESSEL3:
        return sample_bessel3(rng, p["x"], p["t"], m, n), None
    if kind is K.BESSEL3_BRIDGE:
        return sample_bessel3_bridge(rng, p["x"], p["y"], p["T"], m, n), None
    if kind is K.MEANDER:
        return sample_meander(rng, m, n), None
    if kind is K.CO_MEANDER:
        return sample_co_meander(rng, m, n), None
    if kind is K.EXCURSION:
        return sample_excursion(rng, m, n), None
    if kind is K.ASCENT:
        r = sample_ascent(rng, p["method"], m, n)
        return r if isinstance(r, tuple) else (r, None)
    if kind is K.CO_ASCENT:
        return sample_co_ascent(rng, m, n)[0], None
    if kind is K.PSEUDO_BRIDGE:
        return sample_pseudo_bridge(rng, m, n, p["dt_sim"], p["eps"])[0], None
    if kind is K.UPDOWN:
        return sample_updown(rng, p["h"], m, n), None
    if kind is K.QNU_PATH:
        return sample_qnu_path(rng, p["nu"], p["t"], m, n)[0], None
    return sample_williams_drift(rng, p["h"], p["t"], m, n)[0], None


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("PENBM_WORKERS", "1")))
    except ValueError:
        return 1


def generate_batch(kind, n, m=DEFAULT_GRID, seed=0, workers=None, chunk=256, **params):
    """Sample ``n`` paths split into fixed chunks, chunk ``c`` using stream ``(seed, c)``.

    The chunking depends only on ``n`` and ``chunk``, so the output is identical
    for any worker count.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    sizes = [min(chunk, n - s) for s in range(0, n, chunk)]

    def job(c):
        return sample_fragment(kind, RngStream(seed, c), sizes[c], m, **params)

    if workers == 1 or len(sizes) == 1:
        parts = [job(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    vals = np.concatenate([p.values for p, _ in parts])
    w = None if parts[0][1] is None else np.concatenate([q for _, q in parts])
    return Path(vals, parts[0][0].duration), w


def dump_batch(path: Path, csv_file, manifest: dict, weights=None) -> None:
    """Write the batch CSV and its JSON manifest (``<csv>.json``)."""
    write_csv(path, csv_file)
    man = dict(manifest)
    man.setdefault("n", int(np.atleast_2d(path.values).shape[0]))
    man.setdefault("m", path.m)
    if weights is not None:
        man["weights"] = [float(format(x, ".17g")) for x in weights]
    with open(str(csv_file) + ".json", "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")
