"""Ghost-pair stabilization on a short arc against the Green's function."""
import numpy as np

from oilwater import (DensitySpec, InstructionArray, MartingaleTracker, ParticleConfig, build,
                      collect_section4_counters, ghost_stabilize, green_table, replay_martingale,
                      verify_lemma_brw)

g = build("cycle", {"n": 8, "arc": 6})
table = green_table(g)
np.set_printoptions(precision=3, suppress=True)
print("G on the 6-arc:\n", table.G)

sigma = ParticleConfig(np.array([2, 1, 0, 1, 0, 0, 0, 0]), np.array([2, 1, 1, 1, 0, 0, 0, 0]))
rep = verify_lemma_brw(g, sigma, [0, 2, 5], 200_000, seed=2)
for row in rep.rows:
    print(f"y={row.y}: mean m~ {row.mean:.4f} +- {row.se:.4f}, Green sum {row.expected:.4f}")

# one recorded run, re-checked step by step
tracker = MartingaleTracker.for_target(g, 2)
run = ghost_stabilize(g, sigma, InstructionArray(5), target=2, record=True)
print(f"{run.T} steps, worst one-step drift {replay_martingale(g, sigma, run, tracker).max_deviation:.1e}")

s4 = collect_section4_counters(build("cycle", {"n": 12, "arc": 10}), DensitySpec.from_mu(2),
                               n_runs=20_000, seed=3)
for r in s4.rows()[:4]:
    print(f"x={r['x']}: E w {r['w_mean']:.3f}  holes through G {r['w_predicted']:.3f}  z={r['z']:+.2f}")
