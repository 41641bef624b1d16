import math

import numpy as np
import pytest

from gpcert.numerics.grid import Grid, band_limited
from gpcert.numerics.quadrature import (
    DepthExceededError,
    monte_carlo_simplex,
    permuted_times,
    simplex_integrate,
    simplex_nodes,
    simplex_volume,
)


@pytest.mark.parametrize("r,t", [(1, 1.0), (3, 1.0), (4, 0.5)])
def test_volume(r, t):
    val = simplex_integrate(r, t, None, lambda s: np.ones(len(s)))
    assert val == pytest.approx(t**r / math.factorial(r), abs=1e-12)
    assert simplex_volume(r, t) == pytest.approx(val)


def test_linear_integrand():
    assert simplex_integrate(1, 2.0, None, lambda s: s[:, 1]) == pytest.approx(2.0)


def test_nodes_ordered():
    s, w = simplex_nodes(3, 0.7, 5)
    assert s.shape == (125, 3)
    assert np.all(np.diff(s, axis=1) <= 0) and np.all(s <= 0.7) and np.all(s >= 0)
    assert w.sum() == pytest.approx(0.7**3 / 6)


@pytest.mark.parametrize("pi", [(1, 2, 3), (2, 3, 1), (3, 1, 2)])
def test_permuted_region(pi):
    times, _ = permuted_times(3, 1.0, pi, 4)
    assert np.all(times[:, 0] == 1.0)
    ordered = times[:, list(pi)]
    assert np.all(np.diff(ordered, axis=1) <= 0)


def test_permuted_times_rejects_non_permutation():
    with pytest.raises(ValueError):
        permuted_times(3, 1.0, (1, 1, 2))


def test_depth_cap():
    with pytest.raises(DepthExceededError):
        simplex_integrate(5, 1.0, None, lambda s: np.ones(len(s)))


def test_monte_carlo_oracle():
    g = Grid(1, 64)
    rng = np.random.default_rng(11)
    f1, f2 = band_limited(g, rng), band_limited(g, rng)
    coef = np.conj(f1.hat) * f2.hat * g.dx / g.size

    def f(times):
        out = np.empty(len(times), dtype=complex)
        for i in range(0, len(times), 50_000):
            t = times[i : i + 50_000]
            # <U(t1) f1, U(t2) f2>
            ph = np.exp(1j * (t[:, 1] - t[:, 2])[:, None] * g.k2[None, :])
            out[i : i + 50_000] = ph @ coef
        return out

    quad = simplex_integrate(2, 0.5, None, f)
    mean, se = monte_carlo_simplex(2, 0.5, f, 10**6, np.random.default_rng(12))
    assert abs(quad - mean) < 3 * se
