import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oilwater.graph import build
from oilwater.instructions import InstructionArray, reference_pair
from oilwater.particle_config import DensitySpec, ParticleConfig, sample_initial
from oilwater.stabilizer import (Strategy, driven_stabilize, stabilize, up_crossings, verify_abelian,
                                 verify_monotonicity)


def naive_stabilize(g, c0, seed, pick=min):
    """Plain-Python oracle driven by the reference PRF."""
    oil, water = c0.oil.copy(), c0.water.copy()
    m = np.zeros(g.vertex_count, np.int64)
    while True:
        unstable = [v for v in g.active_set if min(oil[v], water[v]) > 0]
        if not unstable:
            return m, oil, water
        x = pick(unstable)
        so, sw = reference_pair(seed, 0, int(x), int(m[x]) + 1, g.degree)
        oil[x] -= 1
        water[x] -= 1
        oil[g.adjacency[x, so]] += 1
        water[g.adjacency[x, sw]] += 1
        m[x] += 1


@pytest.mark.parametrize("policy", ["lowest_id", "highest_pairs", "random:4", "adversarial_nearest_boundary"])
def test_matches_naive_oracle(policy):
    g = build("lattice_box", {"d": 2}, L=3)
    c0 = sample_initial(g, DensitySpec.from_mu(3), seed=2)
    m, oil, water = naive_stabilize(g, c0, 11)
    res = stabilize(g, c0, InstructionArray(11), policy)
    assert np.array_equal(res.odometer.fires, m)
    assert np.array_equal(res.final_config.oil, oil) and np.array_equal(res.final_config.water, water)
    assert res.T == m.sum()


def test_fixed_order_strategy():
    g = build("cycle", {"n": 8, "arc": 6})
    c0 = ParticleConfig(np.array([2, 1, 1, 0, 0, 0, 0, 0]), np.array([2, 1, 1, 0, 0, 0, 0, 0]))
    order = Strategy.parse("fixed_order:5,4,3,2,1,0")
    m, _, _ = naive_stabilize(g, c0, 3, pick=max)
    res = stabilize(g, c0, InstructionArray(3), order)
    assert np.array_equal(res.odometer.fires, m)


def test_final_config_stable_and_mass_conserved():
    g = build("lattice_box", {"d": 2}, L=5)
    c0 = sample_initial(g, DensitySpec.from_mu(5), seed=8)
    res = stabilize(g, c0, InstructionArray(8))
    assert res.final_config.is_stable_in(g)
    assert res.final_config.totals() == c0.totals()


def test_step_cap_truncates():
    g = build("torus_2d", {"side": 4})
    c0 = ParticleConfig(np.full(16, 3), np.full(16, 3))
    res = stabilize(g, c0, InstructionArray(0), step_cap=10)
    assert res.truncated and res.T == 10
    with pytest.raises(ValueError):
        stabilize(g, c0, InstructionArray(0))


def test_stable_input_is_noop():
    g = build("cycle", {"n": 8, "arc": 6})
    c0 = ParticleConfig(np.array([1, 0, 3, 0, 0, 0, 0, 0]), np.zeros(8, np.int64))
    res = stabilize(g, c0, InstructionArray(0))
    assert res.T == 0 and res.final_config == c0


def test_up_crossings():
    assert up_crossings(np.array([0, 1, 0, 0, 1, 2, 1, 0, 1]), 8) == 3
    assert up_crossings(np.array([0, 1, 0, 1]), 2) == 1


def test_driven_hole_identity_and_walk():
    g = build("lattice_box", {"d": 2}, L=5)
    for run in range(20):
        c0 = sample_initial(g, DensitySpec.from_mu(2), seed=4, run=run)
        res = driven_stabilize(g, c0, InstructionArray(4, run), phi=300)
        assert res.neighbor_firings >= 300
        assert res.holes_filled_total[g.origin] == res.up_crossings()
        steps = np.diff(res.r_walk)
        assert set(np.unique(steps)) <= {-1, 0, 1}


def test_driven_phi_zero_is_stabilize():
    g = build("lattice_box", {"d": 2}, L=4)
    c0 = sample_initial(g, DensitySpec.from_mu(3), seed=1)
    a = stabilize(g, c0, InstructionArray(1))
    b = driven_stabilize(g, c0, InstructionArray(1), phi=0)
    assert np.array_equal(a.odometer.fires, b.odometer.fires) and b.injections == 0


def test_abelian_negative_control():
    g = build("lattice_box", {"d": 2}, L=4)
    c0 = sample_initial(g, DensitySpec.from_mu(4), seed=5)
    rep = verify_abelian(g, c0, 1, ["lowest_id", "highest_pairs"], tau_overrides={1: 2})
    assert not rep.passed


def test_monotonicity_rejects_unordered():
    small = build("lattice_box", {"d": 2}, L=3)
    big = build("lattice_box", {"d": 2}, L=5)
    c0 = sample_initial(small, DensitySpec.from_mu(5), 1)
    c1 = sample_initial(big, DensitySpec.from_mu(1), 1)
    with pytest.raises(ValueError):
        verify_monotonicity(small, c0, big, c1, 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=13, max_size=13),
       st.lists(st.integers(0, 4), min_size=13, max_size=13),
       st.integers(0, 2**63))
def test_abelian_property_random(oil, water, seed):
    g = build("lattice_box", {"d": 2}, L=2)
    o = np.zeros(g.vertex_count, np.int64)
    w = np.zeros(g.vertex_count, np.int64)
    o[g.active_set] = oil
    w[g.active_set] = water
    rep = verify_abelian(g, ParticleConfig(o, w), seed,
                         ["lowest_id", "highest_pairs", "random:1", "adversarial_nearest_boundary"])
    assert rep.passed


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(0.0, 3.0), st.integers(0, 2**32))
def test_monotonicity_random(mu, extra, seed):
    small = build("lattice_box", {"d": 2}, L=3)
    big = build("lattice_box", {"d": 2}, L=5)
    c0 = sample_initial(small, DensitySpec.from_mu(mu), seed)
    c1 = sample_initial(big, DensitySpec.from_mu(mu + extra), seed)
    assert verify_monotonicity(small, c0, big, c1, seed).passed
