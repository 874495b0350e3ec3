import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bousspec.commutators import (
    TORUS_AREA,
    commutator_advect,
    commutator_mult,
    fejer_kernel,
    verify_block_commutator,
    verify_est1,
    verify_est2,
    verify_kernel_commutator,
    verify_power_interpolation,
)
from bousspec.initial_data import random_field
from bousspec.spectral import forward_transform, get_grid, inverse_transform, velocity_from_vorticity
from bousspec.transport_diffusion import DivergenceError

G = get_grid(32)


def pair(seed, n=32, cutoff=6):
    g = get_grid(n)
    om = random_field(g, seed, cutoff)
    th = random_field(g, seed + 500, cutoff)
    return velocity_from_vorticity(om), th, om


def sigma(k1, k2, alpha):
    mag = math.hypot(k1, k2)
    return 0j if mag == 0 else 1j * k1 / mag**alpha


def test_mult_constant_u_and_zero_theta():
    _, th, _ = pair(1)
    c = commutator_mult((np.full(G.shape, 2.0), np.full(G.shape, -1.0)), th, 0.7)
    assert max(np.max(np.abs(x)) for x in c) < 1e-12
    u, _, _ = pair(2)
    c = commutator_mult(u, np.zeros(G.shape), 0.7)
    assert max(np.max(np.abs(x)) for x in c) == 0


@pytest.mark.parametrize("ku,kt", [((1, 2), (3, 0)), ((2, -1), (1, 1)), ((0, 3), (2, 2))])
def test_mult_two_mode_symbol_oracle(ku, kt):
    # u1 = cos(ku.x), u2 = 0, theta = cos(kt.x); expand both into exponentials
    alpha = 0.6
    u1 = np.cos(ku[0] * G.x1 + ku[1] * G.x2)
    th = np.cos(kt[0] * G.x1 + kt[1] * G.x2)
    expect = np.zeros(G.shape, dtype=complex)
    for su in (1, -1):
        for st_ in (1, -1):
            k = (su * ku[0] + st_ * kt[0], su * ku[1] + st_ * kt[1])
            expect[k[0] % 32, k[1] % 32] += 0.25 * (sigma(*k, alpha) - sigma(st_ * kt[0], st_ * kt[1], alpha))
    c1, c2 = commutator_mult((u1, np.zeros(G.shape)), th, alpha)
    assert np.max(np.abs(c1 - inverse_transform(expect))) < 1e-12
    assert np.max(np.abs(c2)) == 0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**5), lam=st.floats(-10, 10), mu=st.floats(-10, 10))
def test_mult_bilinear(seed, lam, mu):
    u, th, _ = pair(seed)
    a = commutator_mult((lam * u[0], lam * u[1]), mu * th, 0.8)
    b = commutator_mult(u, th, 0.8)
    scale = max(np.max(np.abs(b[0])), np.max(np.abs(b[1])))
    for x, y in zip(a, b):
        assert np.max(np.abs(x - lam * mu * y)) <= 1e-12 * max(1.0, abs(lam * mu)) * scale


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**5), alpha=st.floats(0.1, 1.0))
def test_advect_equals_div_of_mult(seed, alpha):
    u, th, _ = pair(seed)
    c1, c2 = commutator_mult(u, th, alpha)
    div = inverse_transform(1j * G.k1 * forward_transform(c1) + 1j * G.k2 * forward_transform(c2))
    adv = commutator_advect(u, th, alpha)
    assert np.max(np.abs(adv - div)) < 1e-10


def test_advect_vanishing_cases():
    _, th, _ = pair(3)
    const = (np.full(G.shape, 1.5), np.full(G.shape, 0.5))
    assert np.max(np.abs(commutator_advect(const, th, 0.9))) < 1e-12
    # x1-independent theta and shear u = u(x2) e1: both terms vanish
    th2 = np.cos(2 * G.x2) + 0.3 * np.sin(5 * G.x2)
    shear = (np.sin(3 * G.x2), np.zeros(G.shape))
    assert np.max(np.abs(commutator_advect(shear, th2, 0.9))) < 1e-14


def test_advect_refuses_divergent_u():
    with pytest.raises(DivergenceError):
        commutator_advect((np.sin(G.x1), np.zeros(G.shape)), np.cos(G.x2), 0.5)


def test_est1_zero_theta_and_range():
    _, _, om = pair(4)
    rep = verify_est1(om, np.zeros(G.shape), 0.9, 0.45)
    assert rep.lhs == 0 and rep.ratio == 0
    for s in (0.0, 0.9, 1.2):
        with pytest.raises(ValueError):
            verify_est1(om, om, 0.9, s)


@pytest.mark.parametrize("lam", [0.1, 10.0])
def test_est1_joint_scaling(lam):
    _, th, om = pair(5)
    a = verify_est1(om, th, 0.9, 0.45)
    b = verify_est1(lam * om, lam * th, 0.9, 0.45)
    assert abs(b.lhs - lam**2 * a.lhs) < 1e-12 * lam**2 * a.lhs
    for k in a.rhs_terms:
        assert abs(b.rhs_terms[k] - lam**2 * a.rhs_terms[k]) < 1e-12 * lam**2 * a.rhs_terms[k]
    assert abs(b.ratio - a.ratio) < 1e-12 * a.ratio


def test_est2_examples():
    _, th, _ = pair(6)
    const = (np.full(G.shape, 1.0), np.zeros(G.shape))
    assert verify_est2(const, th, 0.9, -0.1, 4, 1).ratio == 0
    # single modes: u from omega = cos(x1 + 2 x2), theta = cos(3 x1)
    u = velocity_from_vorticity(np.cos(G.x1 + 2 * G.x2))
    rep = verify_est2(u, np.cos(3 * G.x1), 0.9, -0.1, 4, 1)
    assert 0 < rep.ratio < math.inf
    for bad in ((1.0, 4, 1), (-1.0, 4, 1), (0.0, 1.5, 1), (0.0, math.inf, 1), (0.0, 4, 0.5)):
        with pytest.raises(ValueError):
            verify_est2(u, th, 0.9, *bad)


def test_block_commutator_examples():
    _, th, _ = pair(7)
    const = (np.full(G.shape, 1.0), np.full(G.shape, 2.0))
    assert verify_block_commutator(const, th, 0.9, 4).lhs < 1e-12
    u = velocity_from_vorticity(np.cos(3 * G.x1 + G.x2))
    rep = verify_block_commutator(u, np.cos(5 * G.x2), 0.9, 4)
    assert 0 < rep.ratio < math.inf
    with pytest.raises(ValueError):
        verify_block_commutator(u, th, 1.0, 4)


def test_fejer_unit_mass():
    h = fejer_kernel(G, 6)
    assert abs(np.mean(h) * TORUS_AREA - 1) < 1e-14
    assert np.min(h) > -1e-14


def test_kernel_commutator_vanishing_cases():
    h = fejer_kernel(G, 4)
    _, f, g = pair(8)
    r1, r2 = verify_kernel_commutator(h, np.full(G.shape, 3.0), g, 4, 2)
    assert r1.lhs < 1e-13 and r2.lhs < 1e-13
    r1, r2 = verify_kernel_commutator(h, f, np.zeros(G.shape), 4, 2)
    assert r1.lhs == 0 and r2.lhs == 0
    with pytest.raises(ValueError):
        verify_kernel_commutator(h, f, g, 2, 4)


def test_power_interpolation_gamma_two():
    _, f, _ = pair(9)
    f = f - f.mean()
    rep = verify_power_interpolation(f, 2.0, 0.5, 0.9)
    assert abs(rep.ratio - 1) < 1e-12


def test_power_interpolation_zero_and_ranges():
    assert verify_power_interpolation(np.zeros(G.shape), 4.0, 0.5, 0.9).ratio == 0
    _, f, _ = pair(10)
    for args in ((1.5, 0.5, 0.9), (4.0, 0.0, 0.9), (4.0, 0.5, 0.0), (4.0, 0.5, 2.0)):
        with pytest.raises(ValueError):
            verify_power_interpolation(f, *args)


@pytest.mark.parametrize("lam", [1e-2, 1.0, 1e2])
def test_all_ratios_scale_invariant(lam):
    u, th, om = pair(11)
    lu = (lam * u[0], lam * u[1])
    h = fejer_kernel(G, 6)
    pairs = [
        (verify_est1(om, th, 0.9, 0.45), verify_est1(lam * om, lam * th, 0.9, 0.45)),
        (verify_est2(u, th, 0.9, -0.1, 4, 1), verify_est2(lu, lam * th, 0.9, -0.1, 4, 1)),
        (verify_block_commutator(u, th, 0.9, 4), verify_block_commutator(lu, lam * th, 0.9, 4)),
        (verify_kernel_commutator(h, th, om, 4, 2)[0], verify_kernel_commutator(h, lam * th, lam * om, 4, 2)[0]),
        (verify_kernel_commutator(h, th, om, 4, 2)[1], verify_kernel_commutator(h, lam * th, lam * om, 4, 2)[1]),
        (verify_power_interpolation(th, 4, 0.5, 0.9), verify_power_interpolation(lam * th, 4, 0.5, 0.9)),
    ]
    for a, b in pairs:
        assert abs(a.ratio - b.ratio) <= 1e-10 * a.ratio


def test_report_fields():
    _, th, om = pair(12)
    rep = verify_est1(om, th, 0.9, 0.45, seed=12)
    d = rep.to_dict()
    assert d["metadata"]["seed"] == 12 and d["metadata"]["n"] == 32
    assert rep.ratio == pytest.approx(rep.lhs / sum(rep.rhs_terms.values()))
    assert all(v >= 0 for v in rep.rhs_terms.values())
