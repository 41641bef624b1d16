import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpcert.numerics.grid import Grid, GridField, band_limited
from gpcert.numerics.lowrank import (
    LowRankKernel,
    TensorSum,
    distance_report,
    product_distance_bound,
    relative_distance,
    tensor_from_lowrank,
    trace_norm,
    trace_norm_dense,
)


def _random_kernel(grid, rng, m):
    terms = [
        (complex(rng.standard_normal(), rng.standard_normal()), band_limited(grid, rng), band_limited(grid, rng))
        for _ in range(m)
    ]
    return LowRankKernel.from_terms(terms)


def test_rank_one_trace_norm():
    g = Grid(1, 32)
    rng = np.random.default_rng(0)
    a, b = band_limited(g, rng, 0.7), band_limited(g, rng, 1.3)
    assert trace_norm(LowRankKernel.from_terms([(1, a, b)])) == pytest.approx(0.7 * 1.3, rel=1e-12)


def test_orthogonal_pair_has_trace_norm_two():
    g = Grid(1, 32)
    x = g.coords[0]
    e1 = GridField(g, np.cos(x) / np.sqrt(np.pi))
    e2 = GridField(g, np.sin(2 * x) / np.sqrt(np.pi))
    k = LowRankKernel.from_terms([(1, e1, e2), (-1, e2, e1)])
    assert trace_norm(k) == pytest.approx(2.0, rel=1e-12)
    assert k.adjoint().dense() == pytest.approx(k.dense().conj().T)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 6))
def test_trace_norm_matches_dense_oracle(seed, m):
    k = _random_kernel(Grid(1, 32), np.random.default_rng(seed), m)
    ref = trace_norm_dense(k)
    assert abs(trace_norm(k) - ref) <= 1e-10 * ref


def test_kernel_requires_terms():
    with pytest.raises(ValueError):
        LowRankKernel.from_terms([])


def test_hermitian_detection():
    g = Grid(1, 16)
    rng = np.random.default_rng(3)
    a, b = band_limited(g, rng), band_limited(g, rng)
    k = LowRankKernel.from_terms([(2j, a, b), (-2j, b, a)])
    assert k.is_hermitian()
    assert not LowRankKernel.from_terms([(1, a, b)]).is_hermitian()


def test_hs_norm_matches_dense():
    g = Grid(1, 32)
    k = _random_kernel(g, np.random.default_rng(5), 4)
    assert k.hs_norm() == pytest.approx(np.linalg.norm(k.dense()) * g.dx, rel=1e-12)


@pytest.mark.parametrize("kk", [1, 2, 3])
def test_tensor_sum_norms_match_dense(kk):
    g = Grid(1, 8)
    rng = np.random.default_rng(kk)
    terms = [tensor_from_lowrank(complex(rng.standard_normal()), [_random_kernel(g, rng, 2) for _ in range(kk)]) for _ in range(3)]
    total = terms[0] + terms[1] + terms[2]
    dense = 0
    for t in terms:
        op = t.weights[0]
        for s in t.slots:
            op = np.kron(op, s[0])
        dense = dense + op
    ref = np.linalg.norm(dense) * g.dx**kk
    assert total.hs_norm() == pytest.approx(ref, rel=1e-10)


def test_distance_report_k2():
    g = Grid(1, 8)
    rng = np.random.default_rng(9)
    a = tensor_from_lowrank(1.0, [_random_kernel(g, rng, 2), _random_kernel(g, rng, 2)])
    b = tensor_from_lowrank(1.0, [_random_kernel(g, rng, 2), _random_kernel(g, rng, 2)])
    na, nb, nd = distance_report(a, b)
    assert na == pytest.approx(a.hs_norm()) and nb == pytest.approx(b.hs_norm())
    dense = np.kron(a.slots[0][0], a.slots[1][0]) - np.kron(b.slots[0][0], b.slots[1][0])
    assert nd == pytest.approx(np.linalg.norm(dense) * g.dx**2, rel=1e-10)
    assert relative_distance(a, a) < 1e-14
    bound = product_distance_bound([s[0] for s in a.slots], [s[0] for s in b.slots], g.dx)
    assert nd <= bound * (1 + 1e-12)


def test_empty_tensor_sum_norm():
    g = Grid(1, 8)
    empty = TensorSum(g, np.zeros(0, dtype=complex), [np.zeros((0, 8, 8), dtype=complex)] * 2)
    assert empty.hs_norm() == 0.0
