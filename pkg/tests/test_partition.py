import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from penbm.partition import (OriginError, PenaltyParams, PhaseRegion, asymptotic_partition, classify,
                             dual, exact_partition, laplace_leading, partition_table, watson_leading)

CANONICAL = {PhaseRegion.L1: (-1, 0), PhaseRegion.R1: (-2, 1), PhaseRegion.L2: (-1, 1),
             PhaseRegion.R2: (1, 1), PhaseRegion.L3: (2, -1), PhaseRegion.R3: (-1, -1)}


def test_classify_examples():
    for region, (nu, h) in CANONICAL.items():
        assert classify(nu, h) is region
    with pytest.raises(OriginError):
        classify(0, 0)
    with pytest.raises(OriginError):
        PenaltyParams(0.0, 0.0)
    assert classify(-1, 1 + 1e-13) is PhaseRegion.L2
    assert classify(-1, 1 + 1e-9) is PhaseRegion.R2
    assert classify(0.0, 1.0) is PhaseRegion.R2 and classify(0.0, -1.0) is PhaseRegion.R3


def test_alpha():
    assert [r.alpha for r in PhaseRegion] == [0.5, 0.5, 0.5, 1.0, 1.0, 1.0]


def test_dual_examples():
    assert dual(-1, 0) == (-1, 1)
    assert classify(*dual(1, 1)) is PhaseRegion.R3 and dual(1, 1) == (1, -2)
    assert PenaltyParams(1.0, 1.0, 3.0).dual() == PenaltyParams(1.0, -2.0, 3.0)


DUAL_REGION = {PhaseRegion.L1: PhaseRegion.L2, PhaseRegion.L2: PhaseRegion.L1,
               PhaseRegion.R2: PhaseRegion.R3, PhaseRegion.R3: PhaseRegion.R2,
               PhaseRegion.R1: PhaseRegion.R1, PhaseRegion.L3: PhaseRegion.L3}


def test_dual_on_cloud():
    gen = np.random.default_rng(0)
    pts = gen.uniform(-5, 5, (10_000, 2))
    # put a quarter of the points exactly on the boundary lines
    nu = pts[:, 0]
    pts[:2500, 1] = np.where(gen.random(2500) < 0.5, -nu[:2500], -nu[:2500] / 2)
    pts[2500:3000, 1] = 0.0
    for nu, h in pts:
        r = classify(nu, h)
        d = dual(nu, h)
        assert dual(*d) == pytest.approx((nu, h), abs=1e-12)
        assert classify(*d) is DUAL_REGION[r]


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_dual_involution(nu, h):
    if nu == 0 and h == 0:
        return
    assert dual(*dual(nu, h)) == pytest.approx((nu, h), abs=1e-12)


def test_asymptotic_examples():
    t = 7.0
    assert asymptotic_partition(-1, 0, t) == pytest.approx(math.log(math.sqrt(2 / (math.pi * t))))
    assert asymptotic_partition(-1, -1, t) == pytest.approx(t / 2 + math.log(2 / 3))
    assert asymptotic_partition(2, -1, t) == pytest.approx(t / 2 + math.log(2 * t))
    with pytest.raises(OriginError):
        asymptotic_partition(0, 0, 1.0)


def test_exact_closed_forms():
    # nu = 0 reduces to the Gaussian moment generating function
    assert math.exp(exact_partition(0.0, 1.0, 4.0)) == pytest.approx(math.e**2, rel=1e-6)
    assert exact_partition(0.0, -0.7, 3.0) == pytest.approx(0.5 * 0.49 * 3.0, abs=1e-8)
    # h = 0: sup is |N(0,t)|, E exp(nu S) = 2 exp(nu^2 t/2) Phi(nu sqrt t)
    from scipy.stats import norm
    for nu, t in ((-1.0, 5.0), (0.8, 2.0), (-3.0, 40.0)):
        ref = math.log(2) + 0.5 * nu * nu * t + norm.logcdf(nu * math.sqrt(t))
        assert exact_partition(nu, 0.0, t) == pytest.approx(ref, abs=1e-8)


def test_exact_against_quadrature_of_joint_law():
    # independent oracle: integrate exp(nu x + h (x - y)) against the (S_t, X_t) density
    nu, h, t = -0.6, 0.3, 2.0

    def f(x, s):
        # joint density of (S_t, X_t) by reflection
        return 2 * (2 * s - x) / math.sqrt(2 * math.pi * t**3) * math.exp(-(2 * s - x) ** 2 / (2 * t)) \
            * math.exp(nu * s + h * x)
    val = integrate.dblquad(f, 0, 30, lambda s: -30, lambda s: s, epsabs=1e-12)[0]
    assert exact_partition(nu, h, t) == pytest.approx(math.log(val), abs=1e-8)


@pytest.mark.parametrize("region", list(CANONICAL))
def test_exact_duality(region):
    nu, h = CANONICAL[region]
    for t in (1.0, 10.0, 60.0):
        assert exact_partition(nu, h, t) == pytest.approx(exact_partition(*dual(nu, h), t), abs=1e-7)


@pytest.mark.parametrize("region", list(CANONICAL))
def test_ratio_approaches_one(region):
    nu, h = CANONICAL[region]
    rows = partition_table(nu, h, [20, 40, 60])
    dev = [abs(r["ratio"] - 1) for r in rows]
    assert all(b <= a + 1e-9 for a, b in zip(dev, dev[1:]))
    if region is PhaseRegion.R3:
        assert dev[-1] < 0.05


def test_watson():
    assert watson_leading(1.0, 1.0, 1.0, 5.0) == pytest.approx(0.2)
    t = 1e3
    num = integrate.quad(lambda x: np.exp(-t * x), 0, np.inf)[0]
    assert num / watson_leading(1.0, 1.0, 1.0, t) == pytest.approx(1.0, abs=1e-3)
    # diffusive line: E exp(nu S_t) = sqrt(2/(pi t)) int exp(nu x - x^2/2t) dx ~ a0 Gamma(1) / (-nu)
    nu = -1.0
    assert math.log(math.sqrt(2 / (math.pi * t)) * watson_leading(1.0, 1.0, 1.0, -nu)) \
        == pytest.approx(asymptotic_partition(nu, 0.0, t))
    with pytest.raises(ValueError):
        watson_leading(1.0, 0.0, 1.0, 1.0)


def test_laplace():
    t = 9.0
    assert laplace_leading(1.0, 0.0, 1.0, t) == pytest.approx(math.sqrt(2 * math.pi / t))
    t = 1e3
    num = integrate.quad(lambda x: np.exp(-t * (x - 1) ** 2), 0, 2, points=[1.0])[0]
    assert num / laplace_leading(1.0, 0.0, 2.0, t) == pytest.approx(1.0, abs=1e-3)
    # critical line: sqrt(2/pi) t^{3/2} int y^2 exp(-(h y + y^2/2) t) dy, minimum at y = -h
    h = -1.0
    lead = math.sqrt(2 / math.pi) * t**1.5 * laplace_leading(h * h, -h * h / 2, 1.0, t)
    assert math.log(lead) == pytest.approx(asymptotic_partition(2.0, h, t), rel=1e-12)
    with pytest.raises(ValueError):
        laplace_leading(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        laplace_leading(0.0, 0.0, 1.0, 1.0)
