"""Weighted empirical distributions, Kolmogorov-Smirnov tests and z-tests.

Weighted samples come from self-normalized importance sampling.  The KS
p-values use the asymptotic Kolmogorov distribution with the sample size
replaced by the effective sample size ``(sum w)^2 / sum w^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special


@dataclass(frozen=True, eq=False)
class WeightedSample:
    values: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.ones_like(v) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty sample")
        if w.shape != v.shape:
            raise ValueError("values and weights must have the same length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not w.sum() > 0:
            raise ValueError("total weight must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_log_weights(cls, values, log_weights):
        lw = np.asarray(log_weights, dtype=float)
        return cls(values, np.exp(lw - lw.max()))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def ess(self) -> float:
        w = self.weights
        return float(w.sum() ** 2 / (w**2).sum())

    @property
    def normalized_weights(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def mean(self) -> float:
        # same summation for numerator and denominator, so a constant sample is exact
        return float(np.sum(self.weights * self.values) / np.sum(self.weights))

    def std_error(self) -> float:
        """Delta-method standard error of the self-normalized weighted mean."""
        p = self.normalized_weights
        return float(np.sqrt(np.sum(p**2 * (self.values - self.mean()) ** 2)))


def _as_sample(s) -> WeightedSample:
    return s if isinstance(s, WeightedSample) else WeightedSample(s)


def weighted_ecdf(s: WeightedSample):
    """Distinct sorted values and the right-continuous weighted ECDF at each of them."""
    s = _as_sample(s)
    order = np.argsort(s.values, kind="stable")
    x = s.values[order]
    cw = np.cumsum(s.weights[order])
    last = np.r_[x[1:] != x[:-1], True]
    return x[last], cw[last] / cw[-1]


def ecdf_eval(s: WeightedSample, q) -> np.ndarray:
    x, F = weighted_ecdf(s)
    idx = np.searchsorted(x, np.asarray(q, dtype=float), side="right")
    return np.where(idx > 0, F[np.maximum(idx - 1, 0)], 0.0)


def kolmogorov_pvalue(stat: float, n_eff: float) -> float:
    """Asymptotic p-value ``P(K > sqrt(n_eff) * stat)`` for the Kolmogorov distribution."""
    return float(special.kolmogorov(np.sqrt(n_eff) * stat))


def ks_critical_value(n_eff: float, level: float = 0.05) -> float:
    return float(special.kolmogi(level) / np.sqrt(n_eff))


class KSResult(NamedTuple):
    statistic: float
    p_value: float
    n_eff: float


def ks_one_sample(s, cdf) -> KSResult:
    """Sup distance between the weighted ECDF and a reference cdf.

    ``cdf`` is a callable or anything with a ``cdf`` method (e.g. a DensityFn).
    """
    s = _as_sample(s)
    F = cdf.cdf if hasattr(cdf, "cdf") else cdf
    x, Fn = weighted_ecdf(s)
    ref = np.asarray(F(x), dtype=float)
    before = np.r_[0.0, Fn[:-1]]
    d = max(np.max(np.abs(Fn - ref)), np.max(np.abs(ref - before)))
    return KSResult(float(d), kolmogorov_pvalue(d, s.ess), s.ess)


def ks_two_sample(a, b) -> KSResult:
    a, b = _as_sample(a), _as_sample(b)
    grid = np.union1d(a.values, b.values)
    d = float(np.max(np.abs(ecdf_eval(a, grid) - ecdf_eval(b, grid))))
    ne = a.ess * b.ess / (a.ess + b.ess)
    return KSResult(d, kolmogorov_pvalue(d, ne), ne)


class ZTest(NamedTuple):
    z: float
    passed: bool
    mean: float
    std_error: float
    degenerate: bool


def z_test_mean(s, target: float, sigmas: float = 3.0, min_ess: float = 30.0) -> ZTest:
    """``(weighted mean - target) / SE``; passes iff ``|z| <= sigmas``."""
    s = _as_sample(s)
    if s.ess < min_ess:
        raise ValueError(f"effective sample size {s.ess:.1f} below {min_ess}")
    mu, se = s.mean(), s.std_error()
    if se == 0:
        z = 0.0 if np.isclose(mu, target, rtol=0, atol=1e-12) else np.inf
        return ZTest(z, z == 0.0, mu, 0.0, True)
    z = (mu - target) / se
    return ZTest(float(z), bool(abs(z) <= sigmas), mu, se, False)


def z_test_difference(m1, se1, m2, se2, sigmas: float = 3.0) -> ZTest:
    """Two independent estimates agree within ``sigmas`` combined standard errors."""
    se = float(np.hypot(se1, se2))
    if se == 0:
        z = 0.0 if m1 == m2 else np.inf
        return ZTest(z, z == 0.0, m1 - m2, 0.0, True)
    z = (m1 - m2) / se
    return ZTest(float(z), bool(abs(z) <= sigmas), m1 - m2, se, False)


def is_nonincreasing(values, rel_slack: float = 0.0, abs_slack: float = 0.0) -> bool:
    """True when each entry is at most the previous one plus the allowed noise."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] * (1 + rel_slack) + abs_slack))
