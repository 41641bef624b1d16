import numpy as np
import pytest

from gpcert.numerics.definetti import (
    DiscreteMeasure,
    admissibility_residual,
    chebyshev_support,
    is_bosonic_symmetric,
    mixture_hierarchy,
    two_mode_atoms,
    verify_mild_solution,
)
from gpcert.numerics.grid import Grid, band_limited, plane_wave


@pytest.fixture(scope="module")
def grid():
    return Grid(1, 16)


def _unit(grid, seed):
    return band_limited(grid, np.random.default_rng(seed))


def test_measure_validation(grid):
    f = _unit(grid, 0)
    with pytest.raises(ValueError):
        DiscreteMeasure.of([(0.5, f)])
    with pytest.raises(ValueError):
        DiscreteMeasure.of([(1.5, f), (-0.5, f)])
    with pytest.raises(ValueError):
        DiscreteMeasure.of([(1.0, f.scaled(1.1))])
    with pytest.raises(ValueError):
        DiscreteMeasure.of([])


def test_single_atom(grid):
    h = mixture_hierarchy(DiscreteMeasure.of([(1.0, _unit(grid, 1))]), 2)
    assert h.tensor().count == 1
    assert h.trace() == pytest.approx(1.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_admissibility_two_atoms(grid, k):
    mu = DiscreteMeasure.of([(0.5, _unit(grid, 2)), (0.5, _unit(grid, 3))])
    assert admissibility_residual(mu, k) < 1e-12


def test_admissibility_dense_oracle():
    g = Grid(1, 8)
    mu = DiscreteMeasure.of([(0.3, _unit(g, 4)), (0.7, _unit(g, 5))])
    assert admissibility_residual(mu, 2, dense=True) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_trace_of_sub_unit_atom(grid, k):
    mu = DiscreteMeasure.of([(1.0, _unit(grid, 6).scaled(0.8))])
    assert mixture_hierarchy(mu, k).trace() == pytest.approx(0.8 ** (2 * k))


def test_sub_unit_atoms_break_admissibility(grid):
    mu = DiscreteMeasure.of([(1.0, _unit(grid, 6).scaled(0.8))])
    assert admissibility_residual(mu, 1) > 0.1


def test_hermitian_positive_symmetric():
    g = Grid(1, 8)
    mu = DiscreteMeasure.of([(0.2, _unit(g, 7)), (0.3, _unit(g, 8)), (0.5, _unit(g, 9))])
    h = mixture_hierarchy(mu, 2)
    dense = h.dense()
    assert np.allclose(dense, dense.conj().T, atol=1e-14)
    assert h.min_gram_eigenvalue() >= -1e-12
    assert np.linalg.eigvalsh(dense).min() >= -1e-12
    assert is_bosonic_symmetric(mu)


def test_chebyshev_single_atom():
    g = Grid(1, 64)
    f = plane_wave(g, 1.0 / np.sqrt(2 * g.L))  # H1 norm 1
    res = chebyshev_support(DiscreteMeasure.of([(1.0, f)]), 5)
    assert res.m_hat == pytest.approx(1.0)
    assert res.moments == pytest.approx([1.0] * 5)


def test_chebyshev_two_atoms():
    g = Grid(1, 64)
    a, b = two_mode_atoms(g)
    res = chebyshev_support(DiscreteMeasure.of([(0.5, a), (0.5, b)]), 20)
    expected = [(0.5 * (1 + 4**k)) ** (1 / (2 * k)) for k in range(1, 21)]
    assert res.roots == pytest.approx(expected, rel=1e-12)
    assert res.monotone and res.bounded
    assert res.m_hat == pytest.approx(2.0)
    assert 2.0 - res.roots[-1] < 2.0 - res.roots[0]


def test_chebyshev_ignores_zero_weight_atom():
    g = Grid(1, 64)
    a, b = two_mode_atoms(g)
    big = plane_wave(g, 0.1, 20)
    res = chebyshev_support(DiscreteMeasure.of([(0.5, a), (0.5, b), (0.0, big)]), 3)
    assert res.m_hat == pytest.approx(2.0)


def test_mild_solution_zero_time(grid):
    mu = DiscreteMeasure.of([(1.0, _unit(grid, 10))])
    assert verify_mild_solution(mu, 1, 1, 0.0).residual == 0.0


def test_mild_solution_plane_wave():
    g = Grid(1, 32)
    mu = DiscreteMeasure.of([(1.0, plane_wave(g, 0.9 / np.sqrt(g.L)))])
    assert verify_mild_solution(mu, 1, 1, 0.1).residual < 1e-6


@pytest.mark.parametrize("lam", [1, -1])
def test_mild_solution_mixture(lam):
    g = Grid(1, 32)
    rng = np.random.default_rng(3)
    mu = DiscreteMeasure.of([(0.5, band_limited(g, rng, 0.9, kmax=3)), (0.5, band_limited(g, rng, 0.8, kmax=3))])
    good = verify_mild_solution(mu, 2, lam, 0.1)
    flipped = verify_mild_solution(mu, 2, lam, 0.1, coupling_sign=1)
    assert good.residual < 1e-5
    assert flipped.residual > 100 * good.residual
