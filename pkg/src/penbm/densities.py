"""Closed-form densities and distribution functions used as test references.

A :class:`DensityFn` bundles a vectorised pdf, a cdf and the support.  When no
closed-form cdf is supplied it is tabulated once by adaptive quadrature of the
pdf between nodes and interpolated by a Hermite cubic using the pdf as slope.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, interpolate, special, stats

SQRT_2_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True, eq=False)
class DensityFn:
    """Density on an interval ``support = (lo, hi)`` with a vectorised pdf and cdf.

    ``upper`` (and ``lower``) bound the region used to tabulate the cdf when the
    support is infinite; the pdf mass outside must be negligible (< 1e-12).
    """

    pdf_fn: Callable
    support: tuple
    cdf_fn: Callable | None = None
    name: str = ""
    lower: float | None = None
    upper: float | None = None
    nodes: int = 400
    _table: dict = field(default_factory=dict, repr=False)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        with np.errstate(all="ignore"):
            v = self.pdf_fn(np.where(inside, x, 0.5 * (self._lo + self._hi)))
        out = np.where(inside, v, 0.0)
        return out if out.ndim else float(out)

    @property
    def _lo(self):
        return self.support[0] if np.isfinite(self.support[0]) else self.lower

    @property
    def _hi(self):
        return self.support[1] if np.isfinite(self.support[1]) else self.upper

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.cdf_fn is not None:
            lo, hi = self.support
            with np.errstate(all="ignore"):
                v = self.cdf_fn(np.clip(x, lo if np.isfinite(lo) else -np.inf, hi))
            v = np.where(x < lo, 0.0, np.where(x >= hi, 1.0, v))
            return v if v.ndim else float(v)
        spline, a, b = self._tabulated()
        z = np.clip(x, a, b)
        if self._table["angular"]:
            z = np.arcsin(np.sqrt((z - a) / (b - a)))
        v = np.where(x <= a, 0.0, np.where(x >= b, 1.0, spline(z)))
        v = np.clip(v, 0.0, 1.0)
        return v if v.ndim else float(v)

    def _tabulated(self):
        if "spline" not in self._table:
            a, b = self._lo, self._hi
            if a is None or b is None:
                raise ValueError(f"{self.name}: infinite support needs lower/upper for tabulation")
            if np.isfinite(self.support[0]) and np.isfinite(self.support[1]):
                # x = a + (b - a) sin^2(theta) removes arcsine-type endpoint singularities
                th = np.linspace(0.0, np.pi / 2, self.nodes + 1)
                xs = None

                def g(q):
                    return self.pdf(a + (b - a) * np.sin(q) ** 2) * (b - a) * np.sin(2 * q)
                pieces = [integrate.quad(g, th[i], th[i + 1], epsabs=1e-12, epsrel=1e-10,
                                         limit=200)[0] for i in range(self.nodes)]
                knots = th
                slopes = np.array([g(q) for q in np.clip(th, 1e-9, np.pi / 2 - 1e-9)])
            else:
                xs = np.linspace(a, b, self.nodes + 1)
                pieces = [integrate.quad(self.pdf, xs[i], xs[i + 1], epsabs=1e-12,
                                         epsrel=1e-10, limit=200)[0] for i in range(self.nodes)]
                # one-sided limits at the support edges
                inner = np.clip(xs, a + 1e-12 * (b - a), b - 1e-12 * (b - a))
                knots, slopes = xs, np.asarray(self.pdf(inner), dtype=float)
            F = np.concatenate([[0.0], np.cumsum(pieces)])
            F = np.maximum.accumulate(F)
            total = F[-1]
            self._table["total"] = total
            self._table["angular"] = knots is not xs
            # Hermite cubic with the exact derivative (the pdf) at every knot
            self._table["spline"] = interpolate.CubicHermiteSpline(knots, F / total,
                                                                   np.nan_to_num(slopes) / total)
        return self._table["spline"], self._lo, self._hi

    def normalization(self) -> float:
        """Total mass of the pdf by adaptive quadrature over the support."""
        lo, hi = self.support
        if np.isfinite(lo) and np.isfinite(hi):
            # split to help with integrable endpoint singularities
            mid = 0.5 * (lo + hi)
            return sum(integrate.quad(self.pdf, u, v, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
                       for u, v in ((lo, mid), (mid, hi)))
        return integrate.quad(self.pdf, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)[0]


# ---------------------------------------------------------------------------
# point formulas

def bessel3_pdf_from_origin(t, y):
    """Bessel(3) transition density from 0: ``sqrt(2/(pi t^3)) y^2 exp(-y^2/(2t))``."""
    if not np.all(np.asarray(t) > 0):
        raise ValueError("t must be positive")
    y = np.asarray(y, dtype=float)
    out = np.where(y >= 0, np.sqrt(2.0 / (np.pi * t**3)) * y**2 * np.exp(-(y**2) / (2 * t)), 0.0)
    return out if out.ndim else float(out)


def bessel3_pdf(x, t, y):
    """Bessel(3) transition density from ``x > 0`` to ``y`` in time ``t``.

    Evaluated as ``sqrt(2/(pi t)) (y/x) * (exp(-(x-y)^2/2t) - exp(-(x+y)^2/2t)) / 2``,
    which equals the sinh form and does not overflow.
    """
    if not np.all(np.asarray(x) > 0):
        raise ValueError("x must be positive; use bessel3_pdf_from_origin for x = 0")
    if not np.all(np.asarray(t) > 0):
        raise ValueError("t must be positive")
    y = np.asarray(y, dtype=float)
    with np.errstate(all="ignore"):
        d = 0.5 * (np.exp(-((x - y) ** 2) / (2 * t)) - np.exp(-((x + y) ** 2) / (2 * t)))
        out = np.where(y >= 0, np.sqrt(2.0 / (np.pi * t)) * (y / x) * d, 0.0)
    return out if out.ndim else float(out)


def meander_endpoint_pdf(y):
    y = np.asarray(y, dtype=float)
    out = np.where(y >= 0, y * np.exp(-(y**2) / 2), 0.0)
    return out if out.ndim else float(out)


def arcsine_pdf(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("arcsine density needs 0 < u < 1")
    out = 1.0 / (np.pi * np.sqrt(u * (1 - u)))
    return out if out.ndim else float(out)


def trivariate_pdf(x, y, u):
    """Joint density of ``(S_1, S_1 - X_1, Theta_1)`` for standard Brownian motion."""
    x, y, u = (np.asarray(v, dtype=float) for v in (x, y, u))
    if np.any(x < 0) or np.any(y < 0) or np.any((u <= 0) | (u >= 1)):
        raise ValueError("trivariate density needs x, y >= 0 and 0 < u < 1")
    out = x * y / (np.pi * np.sqrt(u**3 * (1 - u) ** 3)) * np.exp(-(x**2) / (2 * u) - y**2 / (2 * (1 - u)))
    return out if out.ndim else float(out)


def bridge_max_ccdf(b, a, T):
    """``P(max of a Brownian bridge from 0 to a over [0, T] > b)`` for ``b >= max(0, a)``."""
    b = np.asarray(b, dtype=float)
    if not T > 0:
        raise ValueError("T must be positive")
    if np.any(b < max(0.0, a) - 1e-15):
        raise ValueError("need b >= max(0, a)")
    out = np.exp(-2 * b * (b - a) / T)
    return out if out.ndim else float(out)


def s_infty_cdf(h, x):
    """CDF of the overall supremum of Brownian motion with drift ``h < 0``."""
    if not h < 0:
        raise ValueError("the supremum is finite only for h < 0")
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, -np.expm1(2 * h * x), 0.0)
    return out if out.ndim else float(out)


def first_passage_pdf(t, level=1.0):
    """Density of the first passage time at ``level`` for standard Brownian motion."""
    t = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = np.where(t > 0, level / np.sqrt(2 * np.pi * t**3) * np.exp(-level**2 / (2 * t)), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# DensityFn factories

def bessel3_origin_density(t=1.0) -> DensityFn:
    return DensityFn(lambda y: bessel3_pdf_from_origin(t, y), (0.0, np.inf),
                     stats.maxwell(scale=np.sqrt(t)).cdf, "bessel3-from-origin",
                     upper=12 * np.sqrt(t))


def bessel3_density(x, t=1.0) -> DensityFn:
    # the endpoint is the norm of a Gaussian vector: noncentral chi with 3 degrees
    ref = stats.ncx2(3, x**2 / t)
    return DensityFn(lambda y: bessel3_pdf(x, t, y), (0.0, np.inf),
                     lambda y: ref.cdf(y**2 / t), "bessel3", upper=x + 12 * np.sqrt(t))


def meander_endpoint_density() -> DensityFn:
    return DensityFn(meander_endpoint_pdf, (0.0, np.inf), lambda y: -np.expm1(-(y**2) / 2),
                     "rayleigh", upper=12.0)


def half_normal_density() -> DensityFn:
    return DensityFn(lambda y: SQRT_2_PI * np.exp(-(y**2) / 2), (0.0, np.inf),
                     lambda y: special.erf(y / np.sqrt(2)), "half-normal", upper=12.0)


def co_meander_endpoint_density() -> DensityFn:
    """Bessel(3) endpoint density reweighted by ``1/y^2`` and tabulated (no closed cdf used)."""
    def pdf(y):
        return bessel3_pdf_from_origin(1.0, y) / np.where(y > 0, y**2, 1.0) * (y > 0)
    return DensityFn(pdf, (0.0, np.inf), None, "co-meander-endpoint", upper=12.0)


def arcsine_density() -> DensityFn:
    return DensityFn(arcsine_pdf, (0.0, 1.0), lambda u: 2 / np.pi * np.arcsin(np.sqrt(u)), "arcsine")


def trivariate_u_marginal() -> DensityFn:
    """``u``-marginal of the trivariate density, integrating ``x`` and ``y`` numerically."""
    # int_0^inf z exp(-z^2 / 2c) dz, computed as c * int_0^inf w exp(-w^2 / 2) dw
    unit = integrate.quad(lambda w: w * np.exp(-(w**2) / 2), 0, np.inf, epsabs=1e-14)[0]

    def ix(c):
        return c * unit

    def pdf(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.array([ix(v) * ix(1 - v) / (np.pi * np.sqrt(v**3 * (1 - v) ** 3)) for v in u.ravel()])
        return out.reshape(u.shape)

    def pdf_scalar(u):
        r = pdf(u)
        return r if np.ndim(u) else float(r[0])

    return DensityFn(pdf_scalar, (0.0, 1.0), None, "trivariate-u-marginal", nodes=200)


def bridge_max_density(a=0.0, T=1.0) -> DensityFn:
    lo = max(0.0, a)
    return DensityFn(lambda b: (4 * b - 2 * a) / T * np.exp(-2 * b * (b - a) / T),
                     (lo, np.inf), lambda b: 1 - bridge_max_ccdf(np.maximum(b, lo), a, T),
                     "bridge-max", upper=lo + 12 * np.sqrt(T))


def s_infty_density(h) -> DensityFn:
    if not h < 0:
        raise ValueError("the supremum is finite only for h < 0")
    return DensityFn(lambda x: -2 * h * np.exp(2 * h * x), (0.0, np.inf),
                     lambda x: s_infty_cdf(h, x), "s-infinity", upper=30 / (-2 * h))


def first_passage_density(level=1.0) -> DensityFn:
    return DensityFn(lambda t: first_passage_pdf(t, level), (0.0, np.inf),
                     lambda t: 2 * stats.norm.sf(level / np.sqrt(np.maximum(t, 1e-300))),
                     "first-passage")


def normal_density(mu=0.0, sigma=1.0) -> DensityFn:
    ref = stats.norm(mu, sigma)
    return DensityFn(ref.pdf, (-np.inf, np.inf), ref.cdf, "normal")


def uniform_density(a=0.0, b=1.0) -> DensityFn:
    return DensityFn(lambda x: np.full(np.shape(x), 1.0 / (b - a)), (a, b),
                     lambda x: (x - a) / (b - a), "uniform")


ALL_DENSITIES = {
    "bessel3-from-origin": bessel3_origin_density,
    "bessel3": lambda: bessel3_density(1.0),
    "meander-endpoint": meander_endpoint_density,
    "arcsine": arcsine_density,
    "trivariate-u-marginal": trivariate_u_marginal,
    "bridge-max": bridge_max_density,
    "s-infinity": lambda: s_infty_density(-1.0),
}
