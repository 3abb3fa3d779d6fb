import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oilwater.ghost_engine import (GHOST_MOVE, PAIR_MOVE, IneligibleMover, MartingaleTracker, apply_move,
                                   brw_expected, check_martingale_step, collect_section4_counters,
                                   ghost_stabilize, replay_martingale, run_batch, verify_lemma_brw)
from oilwater.graph import build
from oilwater.instructions import InstructionArray
from oilwater.particle_config import DensitySpec, ExtendedConfig, ParticleConfig, sample_initial
from oilwater.stabilizer import stabilize


@pytest.fixture(scope="module")
def arc6():
    return build("cycle", {"n": 8, "arc": 6})


def test_apply_move_creates_ghost_on_hole(arc6):
    oil = np.array([1, 0, 0, 0, 0, 0, 0, 0])
    water = np.array([1, 0, 0, 0, 0, 0, 0, 0])
    ghost = np.zeros(8, np.int64)
    a, b = arc6.adjacency[0]
    apply_move(arc6, oil, water, ghost, PAIR_MOVE, 0, a, b)
    assert ghost[b] == 1 and ghost.sum() == 1
    # oil and water to the same vertex: no ghost
    oil[:] = 0; water[:] = 0; ghost[:] = 0
    oil[0] = water[0] = 1
    apply_move(arc6, oil, water, ghost, PAIR_MOVE, 0, a, a)
    assert ghost.sum() == 0


def test_ineligible_mover(arc6):
    cfg = ExtendedConfig.from_base(ParticleConfig.empty(8))
    tr = MartingaleTracker.for_target(arc6, 0)
    with pytest.raises(IneligibleMover):
        check_martingale_step(arc6, cfg, (GHOST_MOVE, 0), tr)
    with pytest.raises(IneligibleMover):
        check_martingale_step(arc6, cfg, (PAIR_MOVE, 6), tr)


@pytest.mark.parametrize("sched", ["ghosts_first", "pairs_first", "random"])
def test_pair_firings_equal_plain_odometer(sched):
    g = build("lattice_box", {"d": 2}, L=4)
    sig = sample_initial(g, DensitySpec.from_mu(3), seed=6)
    tau = InstructionArray(6)
    res = ghost_stabilize(g, sig, tau, sched)
    plain = stabilize(g, sig, tau)
    assert np.array_equal(res.odometer.fires, plain.odometer.fires)
    assert res.final.base == plain.final_config
    assert res.bookkeeping_holds()
    assert not res.final.ghost[g.active].any()


def test_martingale_replay_exact():
    g = build("lattice_box", {"d": 2}, L=4)
    sig = sample_initial(g, DensitySpec.from_mu(3), seed=5)
    tr = MartingaleTracker.for_target(g, 3)
    res = ghost_stabilize(g, sig, InstructionArray(9), target=3, record=True)
    rep = replay_martingale(g, sig, res, tr)
    assert rep.max_deviation <= 1e-9
    assert rep.incremental_error <= 1e-9
    assert rep.final_config_matches


def test_martingale_detects_wrong_weight():
    # a non-harmonic weight breaks the one-step identity
    g = build("cycle", {"n": 8, "arc": 6})
    tr = MartingaleTracker.for_target(g, 0)
    tr.g = np.where(g.active, 1.0, 0.0)
    sig = ParticleConfig(np.array([0, 0, 0, 0, 0, 1, 0, 0]), np.array([0, 0, 0, 0, 0, 1, 0, 0]))
    cfg = ExtendedConfig.from_base(sig)
    assert check_martingale_step(g, cfg, (PAIR_MOVE, 5), tr) > 0.1


def test_brw_expected_closed_form(arc6):
    # one pair at the origin; sinks sit at ring positions 4 and 5, so the
    # origin is index 3 on the path 1..6
    sig = ParticleConfig(np.eye(8, dtype=np.int64)[0], np.eye(8, dtype=np.int64)[0])
    assert abs(brw_expected(arc6, sig, 0) - 2 * 3 * 4 / 7) < 1e-12


def test_brw_small_sample(arc6):
    sig = ParticleConfig(np.array([1, 1, 0, 0, 0, 0, 0, 0]), np.array([1, 2, 0, 0, 0, 0, 0, 0]))
    rep = verify_lemma_brw(arc6, sig, [0, 2, 5], 20_000, seed=3)
    assert rep.all_ok
    assert all(abs(r.z) <= 4 for r in rep.rows)


def test_batch_matches_single_runs(arc6):
    sig = ParticleConfig(np.array([2, 1, 0, 0, 0, 0, 0, 0]), np.array([1, 1, 1, 0, 0, 0, 0, 0]))
    mt, wj, H, T, ok = run_batch(arc6, sig, 12, 5)
    for r in range(5):
        one = ghost_stabilize(arc6, sig, InstructionArray(12, r))
        assert np.array_equal(mt[r], one.odometer.pair_or_ghost_jumps)
        assert np.array_equal(wj[r], one.odometer.ghost_jumps)
        assert T[r] == one.T
    assert ok.all()


def test_section4_identity_small():
    g = build("cycle", {"n": 14, "arc": 12})
    rep = collect_section4_counters(g, DensitySpec.fixed(1, 1), n_runs=5000, seed=1)
    assert rep.all_ok
    assert np.all(np.abs(rep.identity_z) <= 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=6, max_size=6),
       st.lists(st.integers(0, 3), min_size=6, max_size=6),
       st.integers(0, 2**40), st.sampled_from(["ghosts_first", "pairs_first", "random"]))
def test_bookkeeping_property(oil, water, seed, sched):
    g = build("cycle", {"n": 8, "arc": 6})
    sig = ParticleConfig(np.array(oil + [0, 0]), np.array(water + [0, 0]))
    res = ghost_stabilize(g, sig, InstructionArray(seed), sched)
    o = res.odometer
    assert np.array_equal(o.fires, o.pair_or_ghost_jumps - o.ghost_jumps)
    assert np.array_equal(o.ghosts_created, o.waters_into_hole_at)
