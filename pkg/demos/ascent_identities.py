"""Three ways to build a Brownian ascent, and a check that they agree.

    python3 demos/ascent_identities.py
"""
import numpy as np

from penbm.densities import meander_endpoint_density
from penbm.samplers import SQRT_HALF_PI, sample_ascent, sample_co_ascent
from penbm.stats import WeightedSample, ks_one_sample, ks_two_sample

n, m = 5000, 256
rng = np.random.default_rng(3)
fm = sample_ascent(rng, "from-meander", m, n)
dn = sample_ascent(rng, "denisov", m, n, m_sim=2**13)
ca, tau = sample_co_ascent(rng, m, n, m_sim=2**11)
w = SQRT_HALF_PI / np.sqrt(tau)

print("endpoint vs Rayleigh (KS statistic, p-value)")
for name, s in (("from-meander", WeightedSample(fm.values[:, -1])),
                ("denisov", WeightedSample(dn.values[:, -1])),
                ("co-ascent reweighted", WeightedSample(ca.values[:, -1], w))):
    r = ks_one_sample(s, meander_endpoint_density())
    print(f"    {name:<22} {r.statistic:.4f}  {r.p_value:.3f}")

print("two-sample KS at s = 1/4, 1/2")
for s in (0.25, 0.5):
    k = int(s * m)
    r = ks_two_sample(fm.values[:, k], WeightedSample(ca.values[:, k], w))
    q = ks_two_sample(fm.values[:, k], dn.values[:, k])
    print(f"    s = {s}: meander vs co-ascent {r.statistic:.4f} (p {r.p_value:.3f}), "
          f"meander vs denisov {q.statistic:.4f} (p {q.p_value:.3f})")

v = ca.values
integral = (v[:, 1:-1].sum(axis=1) + 0.5 * v[:, -1]) / m / v[:, -1]
s = WeightedSample(integral, w)
print(f"E[int a_s / a_1 ds] = {s.mean():+.4f} +/- {s.std_error():.4f} (should be 0)")
