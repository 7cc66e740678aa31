"""Phase regions, duality and the partition function ``E_0[exp(nu S_t + h X_t)]``.

All partition values are returned as natural logarithms because they grow like
``exp(c t)`` in the ballistic regions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

BOUNDARY_RTOL = 1e-12


class PhaseRegion(str, enum.Enum):
    L1 = "L1"
    R1 = "R1"
    L2 = "L2"
    R2 = "R2"
    L3 = "L3"
    R3 = "R3"

    @property
    def alpha(self) -> float:
        """Scaling exponent: diffusive 1/2 for L1, R1, L2 and ballistic 1 otherwise."""
        return 0.5 if self in (PhaseRegion.L1, PhaseRegion.R1, PhaseRegion.L2) else 1.0

    @property
    def is_line(self) -> bool:
        return self.value.startswith("L")


class OriginError(ValueError):
    pass


@dataclass(frozen=True)
class PenaltyParams:
    nu: float
    h: float
    t: float = 1.0

    def __post_init__(self):
        if self.nu == 0 and self.h == 0:
            raise OriginError("(nu, h) = (0, 0) is excluded")
        if not self.t > 0:
            raise ValueError("horizon t must be positive")

    @property
    def region(self) -> PhaseRegion:
        return classify(self.nu, self.h)

    def dual(self) -> "PenaltyParams":
        nu, h = dual(self.nu, self.h)
        return PenaltyParams(nu, h, self.t)


def classify(nu: float, h: float) -> PhaseRegion:
    """Phase region of ``(nu, h)``; boundary lines are matched to relative tolerance 1e-12."""
    nu, h = float(nu), float(h)
    if nu == 0 and h == 0:
        raise OriginError("(nu, h) = (0, 0) is excluded")
    tol = BOUNDARY_RTOL * max(abs(nu), abs(h))
    if nu < 0 and abs(h) <= tol:
        return PhaseRegion.L1
    if nu < 0 and abs(h + nu) <= tol:
        return PhaseRegion.L2
    if nu > 0 and abs(h + nu / 2) <= tol:
        return PhaseRegion.L3
    if 0 < h < -nu:
        return PhaseRegion.R1
    if h > -nu and h > -nu / 2:
        return PhaseRegion.R2
    if h < 0 and h < -nu / 2:
        return PhaseRegion.R3
    raise AssertionError(f"unclassified point ({nu}, {h})")  # pragma: no cover


def dual(nu: float, h: float) -> tuple[float, float]:
    """The involution ``(nu, h) -> (nu, -(nu + h))``."""
    if nu == 0 and h == 0:
        raise OriginError("(nu, h) = (0, 0) is excluded")
    return nu, -(nu + h) + 0.0  # no negative zero


def asymptotic_partition(nu: float, h: float, t: float) -> float:
    """Log of the leading-order large-``t`` partition function in the region of ``(nu, h)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    r = classify(nu, h)
    if r in (PhaseRegion.L1, PhaseRegion.L2):
        return math.log(-1.0 / nu) + 0.5 * math.log(2.0 / (math.pi * t))
    if r is PhaseRegion.R1:
        return (math.log(-nu / (h**2 * (nu + h) ** 2))
                + 0.5 * math.log(2.0 / (math.pi * t**3)))
    if r is PhaseRegion.R2:
        return math.log(2 * (nu + h) / (nu + 2 * h)) + 0.5 * (nu + h) ** 2 * t
    if r is PhaseRegion.L3:
        return math.log(2 * h * h * t) + 0.5 * h * h * t
    return math.log(2 * h / (nu + 2 * h)) + 0.5 * h * h * t


# ---------------------------------------------------------------------------
# exact partition function by quadrature

class QuadratureError(RuntimeError):
    pass


class PartitionQuad(NamedTuple):
    log_value: float
    abs_error: float  # error estimate on the log scale


def _log_moment(k: float, tol: float) -> float:
    """``log int_0^inf w exp(k w - w^2 / 2) dw`` (log-stabilized)."""
    if k > 0:
        # w = v + k: exp(k^2/2) * int_{-k}^inf (v + k) exp(-v^2/2) dv
        lo = max(-k, -40.0)
        val = integrate.quad(lambda v: (v + k) * np.exp(-v * v / 2), lo, 40.0,
                             epsabs=0, epsrel=tol, limit=200)[0]
        return 0.5 * k * k + math.log(val)
    hi = min(40.0, 80.0 / max(-k, 1e-300))
    val = integrate.quad(lambda w: w * np.exp(k * w - w * w / 2), 0.0, hi,
                         epsabs=0, epsrel=tol, limit=200)[0]
    return math.log(val)


def exact_partition_detail(nu: float, h: float, t: float, rtol: float = 1e-10,
                           log_tol: float = 1e-8) -> PartitionQuad:
    """Partition function from the joint density of ``(S_1, S_1 - X_1, Theta_1)``.

    By Brownian scaling ``E_0[Gamma_t] = E[exp(sqrt(t) (nu x + h (x - y)))]`` over
    the trivariate density.  For fixed ``u`` the ``x`` and ``y`` integrals separate;
    each is evaluated numerically after the substitution ``x = sqrt(u) w``.  The
    outer integral uses ``u = sin^2(theta)``, which cancels the arcsine-type
    endpoint factors and leaves ``(2/pi) int_0^{pi/2} I(a sin theta) I(c cos theta)``
    with ``I(k) = int_0^inf w exp(k w - w^2/2) dw``, ``a = sqrt(t)(nu + h)``,
    ``c = -sqrt(t) h``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    a = math.sqrt(t) * (nu + h)
    c = -math.sqrt(t) * h
    shift = 0.5 * max(a, c, 0.0) ** 2

    def g(th):
        return math.exp(_log_moment(a * math.sin(th), rtol * 1e-2)
                        + _log_moment(c * math.cos(th), rtol * 1e-2) - shift)

    # the integrand concentrates near theta = pi/2 (a large) or 0 (c large)
    pts = [math.pi / 4]
    for k in (a, c):
        if k > 1:
            w = min(math.pi / 4, 4.0 / k)
            pts += [w, math.pi / 2 - w]
    pts = sorted(set(p for p in pts if 0 < p < math.pi / 2))
    val, err = integrate.quad(g, 0.0, math.pi / 2, epsabs=0, epsrel=rtol, limit=500, points=pts)
    if not val > 0:
        raise QuadratureError("partition quadrature returned a nonpositive value")
    log_err = err / val
    if log_err > log_tol:
        raise QuadratureError(f"partition quadrature reached only {log_err:.2e} on the log scale")
    return PartitionQuad(math.log(2 / math.pi) + shift + math.log(val), log_err)


def exact_partition(nu: float, h: float, t: float, rtol: float = 1e-10) -> float:
    """Log of ``E_0[exp(nu S_t + h X_t)]`` by quadrature (see :func:`exact_partition_detail`)."""
    return exact_partition_detail(nu, h, t, rtol).log_value


def partition_table(nu: float, h: float, ts) -> list[dict]:
    """Rows ``(t, log_exact, log_asymptotic, ratio, region)`` for a ladder of horizons."""
    region = classify(nu, h)
    rows = []
    for t in ts:
        le = exact_partition(nu, h, t)
        la = asymptotic_partition(nu, h, t)
        rows.append({"t": float(t), "log_exact": le, "log_asymptotic": la,
                     "ratio": math.exp(le - la), "region": region.value})
    return rows


# ---------------------------------------------------------------------------
# generic leading-order evaluators

def watson_leading(a0: float, lam: float, mu: float, t):
    """Leading Watson term ``Gamma(lam/mu) a0 / t^(lam/mu)`` for ``int_0^inf q(x) e^{-tx} dx``."""
    if not (lam > 0 and mu > 0):
        raise ValueError("lambda and mu must be positive")
    p = lam / mu
    return special.gamma(p) * a0 / np.power(t, p)


def laplace_leading(f_at_x0: float, h_at_x0: float, hpp_at_x0: float, t):
    """Leading Laplace term ``f(x0) sqrt(2 pi / (t h''(x0))) exp(-t h(x0))``."""
    if not hpp_at_x0 > 0:
        raise ValueError("h'' at the minimum must be positive")
    if f_at_x0 == 0:
        raise ValueError("f(x0) must be nonzero")
    return f_at_x0 * np.sqrt(2 * np.pi / (t * hpp_at_x0)) * np.exp(-t * h_at_x0)
