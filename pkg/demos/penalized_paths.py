"""Draw paths under the penalized measure Q_t and look at their shape after scaling.

For each region we draw weighted paths with the region's proposal and report
the weighted mean of a few scaled functionals, next to the value of the
limiting process.

    python3 demos/penalized_paths.py
"""


from penbm import gibbs as G
from penbm.experiments import REGION_POINTS
from penbm.partition import PhaseRegion, exact_partition

t, n, m = 100.0, 4000, 1024
F = {
    "end/sqrt(t)": G.scaled_endpoint(0.5),
    "end/t": G.scaled_endpoint(1.0),
    "argmax/t": G.argmax_fraction(),
}
limits = {
    PhaseRegion.L1: "end/sqrt(t) -> -sqrt(pi/2) = -1.2533",
    PhaseRegion.R1: "end/sqrt(t) -> 0",
    PhaseRegion.L2: "end/sqrt(t) -> sqrt(pi/2) = 1.2533",
    PhaseRegion.R2: "end/t -> nu + h",
    PhaseRegion.L3: "argmax/t -> 1/2 on average, end/t -> 0 on average",
    PhaseRegion.R3: "end/t -> h",
}
for region, (nu, h) in REGION_POINTS.items():
    prop = G.make_proposal(region, nu, h)
    d = G.draw_weighted(F, nu, h, t, prop, n, rng=1, m=m)
    if d.ess < 0.01 * n:
        prop = G.ExtremaProposal()
        d = G.draw_weighted(F, nu, h, t, prop, n, rng=1, m=m)
    est = {k: d.estimate(k) for k in F}
    print(f"{region.value} (nu, h) = ({nu:g}, {h:g})  proposal {prop.kind}  ess {d.ess:.0f}")
    for k, e in est.items():
        print(f"    {k:<12} {e.mean:+.4f} +/- {e.std_error:.4f}")
    print(f"    limit: {limits[region]}")

# the unnormalized mean weight estimates the log partition function
pe = G.estimate_partition(-1.0, -1.0, 10.0, n=20_000, rng=2, m=512)
print(f"\nlog E_0[exp(-S_10 - X_10)]: Monte Carlo {pe.log_mean:.4f} (rel se {pe.rel_se:.3g})")
print(f"                               quadrature  {exact_partition(-1.0, -1.0, 10.0):.4f}")
