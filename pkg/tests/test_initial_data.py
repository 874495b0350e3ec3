import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bousspec.initial_data import PRESETS, make_initial, random_field, taylor_green_velocity, taylor_green_vorticity
from bousspec.spectral import curl_hat, forward_transform, get_grid, inverse_transform


def test_taylor_green_velocity_matches_vorticity():
    g = get_grid(32)
    u = taylor_green_velocity(g, 1.5)
    om = inverse_transform(curl_hat(forward_transform(u[0]), forward_transform(u[1])))
    assert np.max(np.abs(om - taylor_green_vorticity(g, 1.5))) < 1e-13


@pytest.mark.parametrize("name", PRESETS)
def test_presets_shapes(name):
    om, th = make_initial(name, 16, seed=1)
    assert om.shape == th.shape == (16, 16)
    assert np.all(np.isfinite(om)) and np.all(np.isfinite(th))


def test_preset_contents():
    g = get_grid(16)
    om, th = make_initial("taylor-green-plus-mode", 16, amplitude=2.0, mode=3)
    assert np.array_equal(om, taylor_green_vorticity(g, 2.0))
    assert np.max(np.abs(th - 2.0 * np.cos(3 * g.x1))) == 0
    om, th = make_initial("single-mode", 16, mode=2)
    assert not np.any(om) and np.max(np.abs(th - np.cos(2 * g.x1))) == 0
    om, th = make_initial("zero", 16)
    assert not np.any(om) and not np.any(th)
    with pytest.raises(ValueError):
        make_initial("vortex-sheet", 16)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), l2=st.floats(0.1, 10.0))
def test_random_field_normalized_mean_free(seed, l2):
    g = get_grid(32)
    f = random_field(g, seed, l2=l2)
    assert abs(f.mean()) < 1e-14 * l2
    assert abs(math.sqrt(np.mean(f**2)) - l2) < 1e-12 * l2


def test_random_field_band_limited_and_seeded():
    g = get_grid(32)
    f = random_field(g, 7, cutoff=3)
    fh = forward_transform(f)
    outside = (np.abs(g.k1) > 3) | (np.abs(g.k2) > 3)
    assert np.max(np.abs(fh[outside])) < 1e-15
    assert np.array_equal(f, random_field(g, 7, cutoff=3))
    assert not np.array_equal(f, random_field(g, 8, cutoff=3))


def test_random_field_grid_independent():
    # same seed and cutoff resolve the same function on every grid
    a = random_field(get_grid(32), 3, cutoff=4)
    b = random_field(get_grid(64), 3, cutoff=4)
    assert np.max(np.abs(a - b[::2, ::2])) < 1e-13


def test_random_field_zero_and_bad_cutoff():
    g = get_grid(16)
    assert not np.any(random_field(g, 1, l2=0.0))
    for c in (0, 8):
        with pytest.raises(ValueError):
            random_field(g, 1, cutoff=c)


def test_random_pair_distinct_fields():
    om, th = make_initial("random", 32, seed=2)
    assert not np.allclose(om, th)
