import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oilwater.graph import build
from oilwater.particle_config import (DensitySpec, ExtendedConfig, Odometer, ParticleConfig, is_hole,
                                      is_stable, pairs, sample_initial, unpaired)


def test_site_predicates():
    c = ParticleConfig(np.array([2, 0, 1]), np.array([1, 0, 3]))
    assert pairs(c, 0) == 1 and unpaired(c, 0) == 1
    assert is_hole(c, 1) and not is_hole(c, 2)
    assert is_stable(c, 1) and not is_stable(c, 2)


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ParticleConfig(np.array([-1]), np.array([0]))


def test_json_roundtrip():
    c = ParticleConfig(np.array([1, 2]), np.array([0, 5]))
    back = ParticleConfig.from_json(c.to_json())
    assert back == c
    e = ExtendedConfig(c, np.array([3, 0]))
    e2 = ExtendedConfig.from_json(e.to_json())
    assert np.array_equal(e2.ghost, [3, 0]) and e2.base == c
    assert set(json.loads(e.to_json())) == {"oil", "water", "ghost"}


def test_density_mu():
    assert DensitySpec.fixed(1, 1).mu == 2
    assert DensitySpec.bernoulli(0.25).mu == 0.5
    assert DensitySpec.from_mu(3).lam == 1.5


def test_sample_only_on_active():
    g = build("lattice_box", {"d": 2}, L=3)
    c = sample_initial(g, DensitySpec.from_mu(4), seed=1)
    assert not c.oil[~g.active].any() and not c.water[~g.active].any()


def test_poisson_sample_mean():
    g = build("torus_2d", {"side": 40})
    c = sample_initial(g, DensitySpec.poisson(2.0), seed=3)
    # mean of 1600 Poisson(2) draws, 4 standard errors
    assert abs(c.oil.mean() - 2.0) < 4 * np.sqrt(2.0 / 1600)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.integers(0, 2**32))
def test_coupled_sampling_is_monotone(mu1, mu2, seed):
    lo, hi = sorted((mu1, mu2))
    g = build("lattice_box", {"d": 2}, L=3)
    a = sample_initial(g, DensitySpec.from_mu(lo), seed)
    b = sample_initial(g, DensitySpec.from_mu(hi), seed)
    assert a <= b


def test_uniforms_prefix_consistent_across_L():
    small = build("lattice_box", {"d": 2}, L=3)
    big = build("lattice_box", {"d": 2}, L=5)
    a = sample_initial(small, DensitySpec.from_mu(2), 9)
    b = sample_initial(big, DensitySpec.from_mu(2), 9)
    K = small.active
    assert np.array_equal(a.oil[K], b.oil[: small.vertex_count][K])


def test_odometer_bookkeeping_default():
    o = Odometer(np.array([1, 2]))
    assert o.bookkeeping_holds()
    o.ghost_jumps[0] = 1
    assert not o.bookkeeping_holds()
