"""Walk the six phase regions: classify, dualize, and compare the exact
partition function with its leading-order growth.

    python3 demos/phase_diagram.py
"""
import math

from penbm.experiments import CANONICAL_POINTS
from penbm.partition import asymptotic_partition, classify, dual, exact_partition

print(f"{'(nu, h)':>10} {'region':>6} {'dual':>10} {'alpha':>5}   ratio exact/leading at t = 20, 40, 60")
for nu, h in CANONICAL_POINTS:
    r = classify(nu, h)
    d = dual(nu, h)
    ratios = [math.exp(exact_partition(nu, h, t) - asymptotic_partition(nu, h, t)) for t in (20, 40, 60)]
    print(f"{str((nu, h)):>10} {r.value:>6} {str(d):>10} {r.alpha:>5}   "
          + "  ".join(f"{x:.4f}" for x in ratios))

# R1 at (-2, 1) converges slowly: the next correction is of relative order 6/t
for t in (60, 120, 240, 480):
    x = math.exp(exact_partition(-2, 1, t) - asymptotic_partition(-2, 1, t))
    print(f"R1 (-2, 1) t = {t:>3}: ratio {x:.4f}")
