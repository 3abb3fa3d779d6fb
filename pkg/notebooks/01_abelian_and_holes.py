"""Stabilize a lattice ball three ways and watch the origin fill its holes.

Run with ``python notebooks/01_abelian_and_holes.py``.
"""
import numpy as np

from oilwater import DensitySpec, InstructionArray, build, driven_stabilize, sample_initial, stabilize

g = build("lattice_box", {"d": 2}, L=6)
c0 = sample_initial(g, DensitySpec.from_mu(4), seed=1)
tau = InstructionArray(1)
print(f"{g.active.sum()} active sites, {c0.oil.sum()} oil, {c0.water.sum()} water")

# Same instructions, different firing orders: the odometer does not care.
results = {s: stabilize(g, c0, tau, s) for s in ("lowest_id", "highest_pairs", "random:3")}
for name, res in results.items():
    print(f"{name:>14}: T={res.T}  m(o)={res.odometer.fires[g.origin]}")
first = next(iter(results.values())).odometer.fires
print("odometers identical:", all(np.array_equal(first, r.odometer.fires) for r in results.values()))

# Keep dropping pairs on the origin and record water minus oil there.
res = driven_stabilize(g, c0, tau, phi=50_000)
steps = np.diff(res.r_walk)
for v, label in ((1, "+1"), (-1, "-1"), (0, " 0")):
    print(f"P({label}) = {(steps == v).mean():.4f}")
print("lazy walk predicts 3/16 = 0.1875 for each jump")
print("holes filled at o:", res.holes_filled_total[g.origin], " up-crossings:", res.up_crossings())
