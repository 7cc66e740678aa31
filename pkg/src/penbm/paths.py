"""Paths on a uniform time grid and the deterministic transforms acting on them.

A :class:`Path` stores values at the grid times ``k * duration / m`` for
``k = 0..m``.  Leading axes of ``values`` index independent paths sharing the
same grid, so every transform here works on a single path or on a batch.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DEFAULT_GRID = 2**12


@dataclass(frozen=True, eq=False)
class Path:
    """Path (or batch of paths) sampled on a uniform grid over ``[0, duration]``.

    Parameters
    ----------
    values : array_like, shape (..., m + 1)
        Path values at the grid times.  Leading axes are batch axes.
    duration : float
        Length of the time interval covered by the grid.
    """

    values: np.ndarray
    duration: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0 or values.shape[-1] < 3:
            raise ValueError("a path needs at least 3 grid values (m >= 2)")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "duration", float(self.duration))

    @property
    def m(self) -> int:
        return self.values.shape[-1] - 1

    @property
    def dt(self) -> float:
        return self.duration / self.m

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.m + 1)

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[:-1]

    def __len__(self):
        if not self.batch_shape:
            raise TypeError("single path has no len(); use .m")
        return self.batch_shape[0]

    def __getitem__(self, idx) -> "Path":
        if not self.batch_shape:
            raise TypeError("cannot index a single path")
        return Path(self.values[idx], self.duration)

    def with_values(self, values) -> "Path":
        return Path(values, self.duration)


def _check_unit(p: Path):
    if abs(p.duration - 1.0) > 1e-12:
        raise ValueError("transform needs a path of duration 1; rescale it first")


# ---------------------------------------------------------------------------
# running extrema and times

def running_max(p: Path) -> Path:
    return p.with_values(np.maximum.accumulate(p.values, axis=-1))


def running_min(p: Path) -> Path:
    return p.with_values(np.minimum.accumulate(p.values, axis=-1))


def path_max(p: Path) -> np.ndarray | float:
    return p.values.max(axis=-1)


def path_min(p: Path) -> np.ndarray | float:
    return p.values.min(axis=-1)


def argmax_time(p: Path):
    """First grid time at which the path attains its maximum.

    On a piecewise-linear path the maximum sits at a vertex, so the grid
    argmax is exact for the interpolated path; ties go to the earliest index.
    """
    return np.argmax(p.values, axis=-1) * p.dt


def argmin_time(p: Path):
    return np.argmin(p.values, axis=-1) * p.dt


def first_hitting_time(p: Path, level: float):
    """First time the linearly interpolated path reaches ``level``.

    Returns ``nan`` where the level is never reached.  A path starting at the
    level hits it at time 0; otherwise the crossing is located inside the
    first grid cell where ``values - level`` changes sign.
    """
    v = p.values - level
    start_above = v[..., :1] > 0
    crossed = np.where(start_above, v <= 0, v >= 0)
    hit = crossed.any(axis=-1)
    k = np.argmax(crossed, axis=-1)
    km1 = np.maximum(k - 1, 0)
    v1 = np.take_along_axis(v, k[..., None], -1)[..., 0]
    v0 = np.take_along_axis(v, km1[..., None], -1)[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(k > 0, v0 / (v0 - v1), 0.0)
    t = (km1 + np.where(k > 0, frac, 0.0)) * p.dt
    t = np.where(hit, t, np.nan)
    return t if np.ndim(t) else float(t)


def last_hitting_time(p: Path, level: float):
    """Last time the interpolated path is at ``level`` (``nan`` if never)."""
    rev = Path(p.values[..., ::-1], p.duration)
    t = first_hitting_time(rev, level)
    return p.duration - t


# ---------------------------------------------------------------------------
# functionals

def endpoint(p: Path):
    return p.values[..., -1]


def value_at(p: Path, s):
    """Linear interpolation of the path at time(s) ``s`` in ``[0, duration]``."""
    x = np.asarray(s, dtype=float) / p.dt
    k = np.clip(np.floor(x).astype(int), 0, p.m - 1)
    frac = x - k
    v = p.values
    return v[..., k] * (1 - frac) + v[..., k + 1] * frac


def integral(p: Path):
    """Trapezoid approximation of the time integral of the path."""
    v = p.values
    return p.dt * (v[..., 1:-1].sum(axis=-1) + 0.5 * (v[..., 0] + v[..., -1]))


def sup_norm(p: Path):
    return np.abs(p.values).max(axis=-1)


def sup_distance(p: Path, q: Path | np.ndarray):
    """Sup-norm distance between paths on the same grid (q may broadcast)."""
    other = q.values if isinstance(q, Path) else np.asarray(q)
    return np.abs(p.values - other).max(axis=-1)


# ---------------------------------------------------------------------------
# transforms

def phi_transform(p: Path) -> Path:
    """Time reversal shifted to keep the starting point: ``X_{1-s} - (X_1 - X_0)``."""
    _check_unit(p)
    v = p.values
    return p.with_values(v[..., ::-1] - (v[..., -1:] - v[..., :1]))


def straighten_initial(p: Path, delta: float) -> Path:
    """Replace the segment on ``[0, delta)`` by the chord from ``(0, 0)`` to ``(delta, X_delta)``.

    ``X_delta`` is read off the interpolated path, so ``delta`` need not be a
    grid time.  Grid values at times ``>= delta`` are kept.
    """
    _check_unit(p)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    s = p.times
    x_delta = value_at(p, delta)
    line = np.asarray(x_delta)[..., None] * (s / delta)
    return p.with_values(np.where(s < delta, line, p.values))


def scale_path(p: Path, alpha: float) -> Path:
    """``X^{alpha,t}_s = X_{st} / t**alpha`` for a path of duration ``t``."""
    if alpha < 0:
        raise ValueError("scaling exponent must be nonnegative")
    return Path(p.values / p.duration**alpha, 1.0)


def unscale_path(p: Path, t: float, alpha: float) -> Path:
    """Inverse of :func:`scale_path`: stretch a unit-duration path back to ``[0, t]``."""
    _check_unit(p)
    return Path(p.values * t**alpha, t)


def resample(p: Path, m: int) -> Path:
    """Linear interpolation of the path onto a uniform grid with ``m`` steps."""
    s = np.linspace(0.0, p.duration, m + 1)
    return Path(value_at(p, s), p.duration)


def updown_path(theta: float, m: int = DEFAULT_GRID) -> Path:
    """Deterministic up-down path ``theta - |s - theta|`` on ``[0, 1]``."""
    if not 0 <= theta <= 1:
        raise ValueError(f"switch time must lie in [0, 1], got {theta}")
    s = np.linspace(0.0, 1.0, m + 1)
    return Path(theta - np.abs(s - theta), 1.0)


def updown_values(theta, m: int) -> np.ndarray:
    """Vectorised up-down paths for an array of switch times (shape ``theta.shape + (m+1,)``)."""
    s = np.linspace(0.0, 1.0, m + 1)
    theta = np.asarray(theta, dtype=float)[..., None]
    return theta - np.abs(s - theta)


def omega_path(x: float, y: float, u: float, m: int = DEFAULT_GRID) -> Path:
    """Piecewise-linear path through ``(0, 0)``, ``(u, x)`` and ``(1, x - y)``.

    Negative ``x`` and ``y`` are accepted so that the same formula covers the
    down-up shapes; ``u`` must lie strictly inside ``(0, 1)``.
    """
    if not 0 < u < 1:
        raise ValueError(f"u must lie in (0, 1), got {u}")
    s = np.linspace(0.0, 1.0, m + 1)
    v = np.where(s <= u, x * s / u, x - y * (s - u) / (1 - u))
    return Path(v, 1.0)


def pitman_transform(p: Path) -> Path:
    """Pointwise ``2 S - X`` with ``S`` the running maximum."""
    return p.with_values(2 * np.maximum.accumulate(p.values, axis=-1) - p.values)


def reverse_increments(p: Path) -> Path:
    """``X_1 - X_{1-s}``: the map turning a meander into an ascent."""
    _check_unit(p)
    v = p.values
    return p.with_values(v[..., -1:] - v[..., ::-1])


# ---------------------------------------------------------------------------
# CSV dump

def write_csv(p: Path, file) -> None:
    """Write paths one per row with header ``s_0,...,s_m`` (17 significant digits)."""
    rows = np.atleast_2d(p.values)
    own = isinstance(file, (str, bytes)) or hasattr(file, "__fspath__")
    fh = open(file, "w", newline="") if own else file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"s_{k}" for k in range(rows.shape[-1])])
        for r in rows:
            w.writerow([format(x, ".17g") for x in r])
    finally:
        if own:
            fh.close()


def read_csv(file, duration: float = 1.0) -> Path:
    own = isinstance(file, (str, bytes)) or hasattr(file, "__fspath__")
    fh = open(file, newline="") if own else file
    try:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [f"s_{k}" for k in range(len(header))]
        if header != expected:
            raise ValueError("CSV header must be s_0,...,s_m")
        rows = [[float(x) for x in r] for r in reader if r]
    finally:
        if own:
            fh.close()
    return Path(np.array(rows), duration)


def stack(paths: Iterable[Path]) -> Path:
    paths = list(paths)
    d = paths[0].duration
    if any(abs(q.duration - d) > 1e-12 for q in paths):
        raise ValueError("paths must share a duration")
    return Path(np.concatenate([np.atleast_2d(q.values) for q in paths]), d)
