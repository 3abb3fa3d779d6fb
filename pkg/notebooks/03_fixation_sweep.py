"""Density sweep on lattice balls; writes sweep.csv next to this script."""
from pathlib import Path

from oilwater.harness import SWEEP_COLUMNS, fixation_sweep, to_csv

rep = fixation_sweep([1, 2, 5, 10], [4, 8, 16], 50, seed=11, params={"d": 2})
print(" ".join(f"{c:>12}" for c in SWEEP_COLUMNS))
for row in rep.rows:
    print(" ".join(f"{v:>12.4g}" for v in row))
print("truncated runs:", rep.truncations, " m(o) monotone in mu:", rep.monotone_in_mu)
(Path(__file__).parent / "sweep.csv").write_text(to_csv(SWEEP_COLUMNS, rep.rows))
