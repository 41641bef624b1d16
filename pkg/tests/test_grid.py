import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpcert.numerics.grid import (
    Grid,
    GridField,
    band_limited,
    dn_wave,
    energy,
    free_propagate,
    gaussian_bump,
    nls_flow,
    plane_wave,
)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(1, 12)
    with pytest.raises(ValueError):
        Grid(4, 8)
    f = Grid(1, 16).freqs_1d
    # symmetric apart from the unpaired Nyquist mode
    inner = np.sort(f[np.abs(f) < 8])
    assert np.array_equal(inner, -inner[::-1])


def test_fft_round_trip(rng):
    g = Grid(2, 16)
    f = band_limited(g, rng)
    back = GridField.from_hat(g, f.hat)
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))


def test_fields_are_read_only(rng):
    f = band_limited(Grid(1, 32), rng)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@pytest.mark.parametrize("d,n", [(1, 64), (2, 16), (3, 8)])
@settings(max_examples=20, deadline=None)
@given(dt=st.floats(-3, 3, allow_nan=False))
def test_free_propagation_unitary(d, n, dt):
    g = Grid(d, n)
    f = band_limited(g, np.random.default_rng(d), kmax=n // 3)
    h = free_propagate(f, dt)
    assert h.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)
    assert h.h1_norm() == pytest.approx(f.h1_norm(), rel=1e-12)


def test_free_propagation_plane_wave():
    g = Grid(1, 32)
    dt = 0.37
    out = free_propagate(plane_wave(g, 1.0, 3), dt)
    assert np.allclose(out.values, np.exp(-1j * 9 * dt) * plane_wave(g, 1.0, 3).values, atol=1e-13)
    f = plane_wave(g)
    assert free_propagate(f, 0.0) is f


def test_free_propagation_group_law(rng):
    g = Grid(1, 64)
    f = band_limited(g, rng)
    a = free_propagate(free_propagate(f, 0.3), -0.1)
    b = free_propagate(f, 0.2)
    assert np.allclose(a.values, b.values, atol=1e-13)


def test_nls_plane_wave_closed_form():
    g = Grid(1, 64)
    A, t = 0.7, 0.1
    out = nls_flow(plane_wave(g, A), 1, t, 1e-4)
    exact = A * np.exp(1j * (g.coords[0] - (1 + A * A) * t))
    assert np.max(np.abs(out.values - exact)) < 1e-8


def test_nls_zero_time_is_identity(rng):
    f = band_limited(Grid(1, 32), rng)
    assert nls_flow(f, 1, 0.0, 0.01) is f


def test_nls_mass_conservation(rng):
    f = band_limited(Grid(1, 64), rng, norm=1.5)
    out = nls_flow(f, 1, 1.0, 1e-3)
    assert abs(out.l2_norm() - f.l2_norm()) / f.l2_norm() < 1e-10


@pytest.mark.parametrize("lam", [1, -1])
def test_nls_energy_second_order(lam, rng):
    f = band_limited(Grid(1, 64), rng, norm=1.0, kmax=6)
    e0 = energy(f, lam)
    drift = [abs(energy(nls_flow(f, lam, 0.5, dt), lam) - e0) for dt in (0.01, 0.005)]
    assert drift[1] < drift[0] / 3


def test_nls_step_cap():
    with pytest.raises(OverflowError):
        nls_flow(plane_wave(Grid(1, 8)), 1, 1.0, 1e-3, max_steps=10)


@pytest.mark.parametrize("bad", [dict(lam=0, t=1.0, dt=0.1), dict(lam=1, t=-1.0, dt=0.1), dict(lam=1, t=1.0, dt=0.0)])
def test_nls_argument_checks(bad):
    with pytest.raises(ValueError):
        nls_flow(plane_wave(Grid(1, 8)), **bad)


def test_dn_wave_is_stationary_solution():
    g = Grid(1, 128)
    phi0, exact = dn_wave(g, 0.5)
    errs = []
    for dt in (0.004, 0.002):
        out = nls_flow(phi0, -1, 0.4, dt)
        errs.append(np.max(np.abs(out.values - exact(0.4).values)))
    order = math.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2


def test_band_limited_support_and_norm(rng):
    g = Grid(1, 64)
    f = band_limited(g, rng, norm=0.6)
    assert f.l2_norm() == pytest.approx(0.6)
    assert np.all(np.abs(f.hat[np.abs(g.freqs_1d) > g.n / 3]) < 1e-12)


def test_norms_of_constant():
    g = Grid(1, 16)
    one = GridField(g, np.ones(g.shape))
    assert one.l2_norm() == pytest.approx(math.sqrt(2 * math.pi))
    assert one.grad_norm() == pytest.approx(0.0, abs=1e-12)
    assert gaussian_bump(g).lp_norm(2) == pytest.approx(gaussian_bump(g).l2_norm())
