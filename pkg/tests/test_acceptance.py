"""The twelve acceptance criteria, each at its stated tolerance."""
import time

import numpy as np
import pytest

from oilwater.ghost_engine import (MartingaleTracker, collect_section4_counters, ghost_stabilize,
                                   replay_martingale, run_batch, verify_lemma_brw)
from oilwater.graph import build
from oilwater.green import choice_L0, green_table, pair_bound, properties_green_scan, verify_lemma_green
from oilwater.harness import fixation_sweep
from oilwater.instructions import InstructionArray
from oilwater.particle_config import DensitySpec, ParticleConfig, sample_initial
from oilwater.stabilizer import driven_stabilize, verify_abelian, verify_monotonicity

STRATEGIES = ["lowest_id", "highest_pairs", "random:5"]


def _abelian_instances():
    rng = np.random.default_rng(2024)
    out = []
    for i in range(100):
        fam = i % 3
        if fam == 0:
            n = int(rng.integers(6, 41))
            g = build("cycle", {"n": n, "arc": n - 2})
            mu, cap = float(rng.uniform(0.5, 8)), None
        elif fam == 1:
            g = build("torus_2d", {"side": int(rng.integers(4, 9))})
            mu, cap = float(rng.uniform(0.2, 0.8)), 10**7
        else:
            g = build("lattice_box", {"d": 2}, L=int(rng.integers(1, 7)))
            mu, cap = float(rng.uniform(0.5, 8)), None
        out.append((g, sample_initial(g, DensitySpec.from_mu(mu), seed=i), int(rng.integers(2**63)), cap))
    return out


def test_01_abelian(acceptance):
    t0 = time.perf_counter()
    ok = 0
    for g, c0, seed, cap in _abelian_instances():
        ok += verify_abelian(g, c0, seed, STRATEGIES, cap).passed
    dt = time.perf_counter() - t0
    assert acceptance(1, ok == 100 and dt < 60, f"abelian {ok}/100 bit-identical, {dt:.1f}s")


def test_02_monotone(acceptance):
    small = build("lattice_box", {"d": 2}, L=3)
    big = build("lattice_box", {"d": 2}, L=5)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    ok = 0
    for i in range(100):
        mu = float(rng.uniform(0.5, 8))
        c0 = sample_initial(small, DensitySpec.from_mu(mu), seed=i)
        c1 = sample_initial(big, DensitySpec.from_mu(mu + float(rng.uniform(0, 4))), seed=i)
        ok += verify_monotonicity(small, c0, big, c1, seed=1000 + i).passed
    dt = time.perf_counter() - t0
    assert acceptance(2, ok == 100 and dt < 60, f"monotone {ok}/100, {dt:.1f}s")


def test_03_r_walk_law(acceptance):
    g = build("lattice_box", {"d": 2}, L=8)
    t0 = time.perf_counter()
    res = driven_stabilize(g, sample_initial(g, DensitySpec.from_mu(2), seed=3),
                           InstructionArray(3), phi=100_000)
    s = np.diff(res.r_walk)[:100_000]
    p_up, p_dn, p_0 = (s == 1).mean(), (s == -1).mean(), (s == 0).mean()
    dt = time.perf_counter() - t0
    passed = (abs(p_up - 3 / 16) <= 0.01 and abs(p_dn - 3 / 16) <= 0.01 and abs(p_0 - 0.625) <= 0.01
              and dt < 60)
    assert acceptance(3, passed, f"P(+1)={p_up:.4f} P(-1)={p_dn:.4f} P(0)={p_0:.4f} over "
                                 f"{s.size} steps, {dt:.1f}s")


def test_04_hole_identity(acceptance):
    g = build("lattice_box", {"d": 2}, L=5)
    bad = 0
    n = 1000
    for r in range(n):
        c0 = sample_initial(g, DensitySpec.from_mu(1 + r % 5), seed=44, run=r)
        res = driven_stabilize(g, c0, InstructionArray(44, r), phi=200)
        bad += int(res.holes_filled_total[g.origin]) != res.up_crossings()
    assert acceptance(4, bad == 0, f"H(o) = J(N_K) on {n - bad}/{n} driven trajectories")


def test_05_martingale(acceptance):
    g = build("lattice_box", {"d": 2}, L=5)
    y = 7
    tracker = MartingaleTracker.for_target(g, y)
    t0 = time.perf_counter()
    steps, worst, run = 0, 0.0, 0
    while steps < 10_000:
        sig = sample_initial(g, DensitySpec.from_mu(4), seed=55, run=run)
        sched = ("ghosts_first", "pairs_first", "random")[run % 3]
        res = ghost_stabilize(g, sig, InstructionArray(55, run), sched, target=y, record=True)
        rep = replay_martingale(g, sig, res, tracker)
        worst = max(worst, rep.max_deviation, rep.incremental_error)
        steps += res.T
        run += 1
    dt = time.perf_counter() - t0
    assert acceptance(5, worst <= 1e-9 and dt < 60,
                      f"max deviation {worst:.2e} over {steps} steps ({run} runs), {dt:.1f}s")


BRW_SIGMA = ParticleConfig(np.array([2, 1, 0, 1, 0, 0, 0, 0]), np.array([2, 1, 1, 1, 0, 0, 0, 0]))
BRW_TARGETS = [0, 2, 5]


def test_06_lemma_brw(acceptance):
    g = build("cycle", {"n": 8, "arc": 6})
    assert BRW_SIGMA.pairs().sum() <= 5
    t0 = time.perf_counter()
    small = verify_lemma_brw(g, BRW_SIGMA, BRW_TARGETS, 100_000, seed=66)
    large = verify_lemma_brw(g, BRW_SIGMA, BRW_TARGETS, 1_000_000, seed=67)
    dt = time.perf_counter() - t0
    z = [r.z for r in small.rows]
    rel = [r.rel_error for r in large.rows]
    passed = (all(abs(v) <= 3 for v in z) and all(v <= 0.01 for v in rel)
              and small.all_ok and large.all_ok and dt < 600)
    assert acceptance(6, passed, "z@1e5=" + ",".join(f"{v:+.2f}" for v in z)
                      + " rel@1e6=" + ",".join(f"{v:.4f}" for v in rel) + f", {dt:.1f}s")


def test_07_bookkeeping(acceptance):
    graphs = [build("cycle", {"n": 8, "arc": 6}), build("lattice_box", {"d": 2}, L=4),
              build("regular_tree_ball", {"degree": 3}, L=3)]
    runs, bad = 0, 0
    for gi, g in enumerate(graphs):
        for r in range(300):
            sig = sample_initial(g, DensitySpec.from_mu(1 + r % 6), seed=77 + gi, run=r)
            res = ghost_stabilize(g, sig, InstructionArray(77 + gi, r), ("ghosts_first", "pairs_first", "random")[r % 3])
            bad += not res.bookkeeping_holds()
            runs += 1
        oil, water = [np.stack(a) for a in zip(*[(c.oil, c.water) for c in
                      (sample_initial(g, DensitySpec.from_mu(3), seed=7, run=r) for r in range(2000))])]
        ok = run_batch(g, (oil, water), 7, 2000)[4]
        bad += int((~ok).sum())
        runs += 2000
    assert acceptance(7, bad == 0, f"m = m~ - w exact on {runs - bad}/{runs} ghost runs")


def test_08_green_identities(acceptance):
    t0 = time.perf_counter()
    worst_solve, worst_lemma = 0.0, 0.0
    for g in (build("cycle", {"n": 10, "arc": 8}), build("lattice_box", {"d": 2}, L=4)):
        a = green_table(g, method="direct_solve")
        b = green_table(g, method="hitting_prob")
        worst_solve = max(worst_solve, float(np.abs(a.G - b.G).max()))
        K = g.active_set
        d = g.distances([g.origin])
        for B in ([g.origin], K[d[K] <= 1], K[d[K] <= 2], K, K[d[K] == 3]):
            worst_lemma = max(worst_lemma, verify_lemma_green(g, K, B, g.origin).difference)
    fix = green_table(build("cycle", {"n": 8, "arc": 2})).G
    fix_err = float(np.abs(fix - np.array([[4 / 3, 2 / 3], [2 / 3, 4 / 3]])).max())
    dt = time.perf_counter() - t0
    passed = worst_solve <= 1e-10 and worst_lemma <= 1e-10 and fix_err <= 1e-10 and dt < 60
    assert acceptance(8, passed, f"solve diff {worst_solve:.1e}, lemma diff {worst_lemma:.1e}, "
                                 f"fixture diff {fix_err:.1e}, {dt:.1f}s")


def test_09_properties_green(acceptance):
    t0 = time.perf_counter()
    cyc = properties_green_scan("cycle", 1, range(3, 65))
    lat = properties_green_scan("lattice_box", 1, range(5, 21), {"d": 2})
    dt = time.perf_counter() - t0
    ok_c = all(r["holds"] for r in cyc.rows)
    ok_l = all(r["holds"] for r in lat.rows)
    passed = ok_c and ok_l and cyc.L0_bound == 3 and lat.L0_bound == 5 and dt < 300
    worst = max(r["ratio"] for r in cyc.rows + lat.rows)
    assert acceptance(9, passed, f"cycle L in [3,64]: {ok_c}, lattice L in [5,20]: {ok_l}, "
                                 f"max ratio {worst:.3f} < 10, {dt:.1f}s")


def test_10_pair_bound_sign(acceptance):
    vals = []
    for fam, params, Ls in (("cycle", {}, range(4, 65)), ("lattice_box", {"d": 2}, range(6, 21))):
        L0 = choice_L0(1, build(fam, params, 3).degree)
        assert min(Ls) > L0
        vals += [pair_bound(build(fam, params, L), L, 1, 1.0) for L in Ls]
    assert acceptance(10, max(vals) < 0, f"pair_bound < 0 at {len(vals)} sizes, max {max(vals):.3f}")


def test_11_fixation_sweep(acceptance):
    t0 = time.perf_counter()
    rep = fixation_sweep([1, 2, 5, 10], [4, 8, 16], 200, seed=11, params={"d": 2}, step_cap=10**8)
    dt = time.perf_counter() - t0
    means = {(r[1], r[0]): r[3] for r in rep.rows}
    finite = all(np.isfinite(v) for v in means.values())
    nondecr = all(means[(L, a)] <= means[(L, b)] for L in (4, 8, 16) for a, b in ((1, 2), (2, 5), (5, 10)))
    passed = rep.truncations == 0 and finite and nondecr and rep.monotone_in_mu and dt < 1800
    assert acceptance(11, passed, f"{rep.truncations}/2400 truncated, mean m(o) non-decreasing: "
                                  f"{nondecr}, {dt:.1f}s")


def test_12_ghost_jump_identity(acceptance):
    g = build("cycle", {"n": 12, "arc": 10})
    t0 = time.perf_counter()
    rep = collect_section4_counters(g, DensitySpec.from_mu(2), n_runs=100_000, seed=12)
    dt = time.perf_counter() - t0
    z = rep.identity_z
    o = int(np.flatnonzero(rep.vertices == g.origin)[0])
    passed = bool(np.all(np.abs(z) <= 3)) and rep.all_ok and dt < 600
    assert acceptance(12, passed, f"E w(o)={rep.w_mean[o]:.4f} vs {rep.w_predicted[o]:.4f}, "
                                  f"max |z| over K {np.abs(z).max():.2f}, {dt:.1f}s")
