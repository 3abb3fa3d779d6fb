import numpy as np
import pytest

from oilwater.graph import build
from oilwater.instructions import (FiringCounter, IllegalFiring, InstructionArray, _py_mix64, fire,
                                   mix64, reference_pair)
from oilwater.particle_config import ParticleConfig


def test_splitmix_known_value():
    # first output of SplitMix64 seeded with 0
    assert _py_mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert int(mix64(np.uint64(0x9E3779B97F4A7C15))) == 0xE220A8397B1DCDAF


def test_compiled_matches_reference():
    tau = InstructionArray(123, run=4)
    for x in range(5):
        for j in range(1, 20):
            assert tau.pair(x, j, 4) == reference_pair(123, 4, x, j, 4)


def test_golden_pairs():
    tau = InstructionArray(7)
    got = [tau.pair(x, j, 4) for x in range(3) for j in (1, 2)]
    assert got == [(2, 2), (2, 2), (0, 2), (3, 1), (3, 2), (0, 1)]


def test_runs_and_streams_differ():
    a = InstructionArray(5, 0)
    b = InstructionArray(5, 1)
    assert not np.array_equal(a.pairs(0, range(1, 50), 4), b.pairs(0, range(1, 50), 4))
    assert not np.array_equal(a.pairs(0, range(1, 50), 4)[:, 0], a.ghosts(0, range(1, 50), 4))


def test_slots_uniform():
    js = np.arange(1, 100_001)
    p = InstructionArray(99).pairs(3, js, 4)
    counts = np.bincount(p[:, 0] * 4 + p[:, 1], minlength=16)
    expected = len(js) / 16
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 40          # 15 dof, far beyond the 0.999 quantile (37.7)


def test_fire_moves_one_pair():
    g = build("cycle", {"n": 8, "arc": 6})
    c = ParticleConfig(np.array([1, 0, 0, 0, 0, 0, 0, 0]), np.array([2, 0, 0, 0, 0, 0, 0, 0]))
    h = FiringCounter(8)
    tau = InstructionArray(1)
    so, sw = tau.pair(0, 1, 2)
    fire(g, c, h, tau, 0)
    assert c.oil[0] == 0 and c.water[0] == 1
    assert c.oil[g.adjacency[0, so]] == 1
    assert h[0] == 1
    with pytest.raises(IllegalFiring):
        fire(g, c, h, tau, 0)
    with pytest.raises(IllegalFiring):
        fire(g, c, h, tau, 6)
