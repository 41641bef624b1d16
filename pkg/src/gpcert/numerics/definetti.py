"""Discrete de Finetti mixtures, Chebyshev moments and the mild-solution check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .grid import Grid, GridField, free_propagate, nls_flow
from .lowrank import TensorSum, distance_report
from .quadrature import gauss_interval


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: Tuple[Tuple[float, GridField], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a measure needs at least one atom")
        ws = [w for w, _ in self.atoms]
        if min(ws) < 0:
            raise ValueError("weights must be nonnegative")
        if abs(sum(ws) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(ws)}, not 1")
        for _, f in self.atoms:
            if f.l2_norm() > 1.0 + 1e-12:
                raise ValueError(f"atom with L2 norm {f.l2_norm():.6g} lies outside the unit ball")

    @classmethod
    def of(cls, pairs: Sequence) -> "DiscreteMeasure":
        return cls(tuple((float(w), f) for w, f in pairs))

    @property
    def grid(self) -> Grid:
        return self.atoms[0][1].grid

    def support(self):
        return [(w, f) for w, f in self.atoms if w > 0]


def outer(f: np.ndarray, g: np.ndarray = None) -> np.ndarray:
    g = f if g is None else g
    return np.outer(f.reshape(-1), g.reshape(-1).conj())


@dataclass
class MixtureHierarchy:
    mu: DiscreteMeasure
    k: int

    def tensor(self) -> TensorSum:
        atoms = self.mu.support()
        w = np.array([a for a, _ in atoms], dtype=complex)
        slot = np.stack([outer(f.values) for _, f in atoms])
        return TensorSum(self.mu.grid, w, [slot] * self.k)

    def trace(self) -> float:
        return float(sum(w * f.l2_norm() ** (2 * self.k) for w, f in self.mu.support()))

    def partial_trace(self) -> TensorSum:
        """Exact partial trace over the last particle in product form."""
        if self.k < 2:
            raise ValueError("need k >= 2 to trace out a particle")
        atoms = self.mu.support()
        w = np.array([a * f.l2_norm() ** 2 for a, f in atoms], dtype=complex)
        slot = np.stack([outer(f.values) for _, f in atoms])
        return TensorSum(self.mu.grid, w, [slot] * (self.k - 1))

    def dense(self) -> np.ndarray:
        """Full matrix on ``P^k`` points; only for tiny grids."""
        p = self.mu.grid.size
        if p**self.k > 4096:
            raise MemoryError("dense hierarchy too large; use the product form")
        out = 0
        for w, f in self.mu.support():
            v = f.values.reshape(-1)
            for _ in range(self.k - 1):
                v = np.kron(v, f.values.reshape(-1))
            out = out + w * np.outer(v, v.conj())
        return np.asarray(out)

    def min_gram_eigenvalue(self) -> float:
        """Smallest eigenvalue of the nonzero spectrum via the atom Gram matrix."""
        atoms = self.mu.support()
        dx = self.mu.grid.dx
        vecs = np.stack([f.values.reshape(-1) for _, f in atoms])
        g = (vecs.conj() @ vecs.T * dx) ** self.k
        sw = np.sqrt([w for w, _ in atoms])
        return float(np.linalg.eigvalsh(sw[:, None] * g * sw[None, :]).min())


def mixture_hierarchy(mu: DiscreteMeasure, k: int) -> MixtureHierarchy:
    if k < 1:
        raise ValueError("k must be >= 1")
    return MixtureHierarchy(mu, k)


def dense_partial_trace(gamma: np.ndarray, p: int, k: int, dx: float) -> np.ndarray:
    """Trace out the last of ``k`` particles from a dense ``P^k x P^k`` kernel."""
    g = gamma.reshape(p ** (k - 1), p, p ** (k - 1), p)
    return np.einsum("aibi->ab", g) * dx


def admissibility_residual(mu: DiscreteMeasure, k: int, dense: bool = False) -> float:
    """Relative HS distance between ``Tr_{k+1} gamma^(k+1)`` and ``gamma^(k)``."""
    hi, lo = mixture_hierarchy(mu, k + 1), mixture_hierarchy(mu, k)
    if dense:
        g = mu.grid
        pt = dense_partial_trace(hi.dense(), g.size, k + 1, g.dx)
        ref = lo.dense()
        nrm = np.linalg.norm(ref)
        return float(np.linalg.norm(pt - ref) / nrm) if nrm else float(np.linalg.norm(pt))
    na, nb, diff = distance_report(hi.partial_trace(), lo.tensor())
    ref = max(na, nb)
    return diff / ref if ref else diff


def is_bosonic_symmetric(mu: DiscreteMeasure, tol: float = 1e-14) -> bool:
    """Check invariance under swapping both particle slots (``k = 2``, dense)."""
    p = mu.grid.size
    g = mixture_hierarchy(mu, 2).dense().reshape(p, p, p, p)
    swapped = g.transpose(1, 0, 3, 2)
    return bool(np.linalg.norm(g - swapped) <= tol * max(np.linalg.norm(g), 1.0))


@dataclass
class ChebyshevResult:
    moments: List[float]
    roots: List[float]
    m_hat: float
    monotone: bool
    bounded: bool


def chebyshev_support(mu: DiscreteMeasure, K: int) -> ChebyshevResult:
    if K < 1:
        raise ValueError("K must be >= 1")
    atoms = mu.support()
    norms = [f.h1_norm() for _, f in atoms]
    m_hat = max(norms)
    moments = [sum(w * n ** (2 * k) for (w, _), n in zip(atoms, norms)) for k in range(1, K + 1)]
    roots = [mk ** (1.0 / (2 * k)) for k, mk in enumerate(moments, start=1)]
    slack = 1e-12 * max(m_hat, 1.0)
    monotone = all(b >= a - slack for a, b in zip(roots, roots[1:]))
    bounded = all(x <= m_hat + slack for x in roots)
    return ChebyshevResult(moments, roots, m_hat, monotone, bounded)


@dataclass
class MildResult:
    residual: float
    lhs_norm: float
    rhs_norm: float
    diff_norm: float


def _slot_stack(fields: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([outer(f) for f in fields])


def verify_mild_solution(
    mu: DiscreteMeasure,
    k: int,
    lam: int,
    t: float,
    nodes: int = 16,
    dt: float = 1e-4,
    coupling_sign: int = -1,
) -> MildResult:
    """Compare ``gamma(t)`` with the Duhamel form of the hierarchy for a mixture.

    Both sides are built from the NLS flow of each atom; the interaction term
    is ``coupling_sign * i * lam * int_0^t U(t-s) B gamma^(k+1)(s) ds``, integrated
    with ``nodes``-point Gauss-Legendre in ``s``.
    """
    grid = mu.grid
    atoms = mu.support()
    if t == 0:
        return MildResult(0.0, 0.0, 0.0, 0.0)
    s_nodes, s_weights = gauss_interval(0.0, t, nodes)
    lhs_w, lhs_slots = [], [[] for _ in range(k)]
    rhs_w, rhs_slots = [], [[] for _ in range(k)]
    for w, f in atoms:
        # LHS and free term
        ft = nls_flow(f, lam, t, dt)
        lhs_w.append(w)
        for j in range(k):
            lhs_slots[j].append(outer(ft.values))
        u0 = free_propagate(f, t).values
        rhs_w.append(w)
        for j in range(k):
            rhs_slots[j].append(outer(u0))
        # interaction term, marching the flow through the nodes
        cur, s_prev = f, 0.0
        for s, gw in zip(s_nodes, s_weights):
            cur = nls_flow(cur, lam, s - s_prev, dt)
            s_prev = s
            v = cur.values
            psi = np.abs(v) ** 2 * v
            uphi = free_propagate(cur, t - s).values
            upsi = free_propagate(GridField(grid, psi), t - s).values
            b_slot = outer(upsi, uphi) - outer(uphi, upsi)
            plain = outer(uphi)
            for j in range(k):
                rhs_w.append(coupling_sign * 1j * lam * w * gw)
                for i in range(k):
                    rhs_slots[i].append(b_slot if i == j else plain)
    lhs = TensorSum(grid, np.array(lhs_w, dtype=complex), [np.stack(s) for s in lhs_slots]).compressed()
    rhs = TensorSum(grid, np.array(rhs_w, dtype=complex), [np.stack(s) for s in rhs_slots]).compressed()
    nl, nr, diff = distance_report(lhs, rhs)
    return MildResult(diff / nl if nl else diff, nl, nr, diff)


def two_mode_atoms(grid: Grid) -> Tuple[GridField, GridField]:
    """Plane-wave atoms with H1 norms 1 and 2 and L2 norms below 1."""
    if grid.d != 1:
        raise ValueError("one-dimensional helper")
    x = grid.coords[0]
    box = grid.L
    c1 = 1.0 / math.sqrt(2.0 * box)
    c3 = 2.0 / math.sqrt(10.0 * box)
    return GridField(grid, c1 * np.exp(1j * x)), GridField(grid, c3 * np.exp(3j * x))
