"""Low-rank one-particle kernels and sums of tensor-product multi-particle kernels.

Kernels act on ``L^2`` of the grid with the cell volume as quadrature weight,
so the operator matrix in an orthonormal basis is ``K * dx``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .grid import Grid, GridField


class LowRankKernel:
    """``sum_b c_b chi_b(x) conj(psi_b)(x')`` stored as stacked arrays."""

    def __init__(self, grid: Grid, coeffs, left, right):
        self.grid = grid
        self.coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        self.left = np.asarray(left, dtype=complex).reshape(len(self.coeffs), grid.size)
        self.right = np.asarray(right, dtype=complex).reshape(len(self.coeffs), grid.size)

    @classmethod
    def from_terms(cls, terms: Sequence) -> "LowRankKernel":
        """Build from ``(c, chi: GridField, psi: GridField)`` triples."""
        if not terms:
            raise ValueError("a kernel needs at least one term")
        grid = terms[0][1].grid
        return cls(
            grid,
            [c for c, _, _ in terms],
            np.stack([l.values.reshape(-1) for _, l, _ in terms]),
            np.stack([r.values.reshape(-1) for _, _, r in terms]),
        )

    def __len__(self):
        return len(self.coeffs)

    @property
    def terms(self):
        sh = self.grid.shape
        return [
            (c, GridField(self.grid, l.reshape(sh)), GridField(self.grid, r.reshape(sh)))
            for c, l, r in zip(self.coeffs, self.left, self.right)
        ]

    def dense(self) -> np.ndarray:
        return (self.left.T * self.coeffs) @ self.right.conj()

    def adjoint(self) -> "LowRankKernel":
        return LowRankKernel(self.grid, self.coeffs.conj(), self.right, self.left)

    def __add__(self, other: "LowRankKernel") -> "LowRankKernel":
        return LowRankKernel(
            self.grid,
            np.concatenate([self.coeffs, other.coeffs]),
            np.vstack([self.left, other.left]),
            np.vstack([self.right, other.right]),
        )

    def scaled(self, c: complex) -> "LowRankKernel":
        return LowRankKernel(self.grid, c * self.coeffs, self.left, self.right)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def hs_norm(self) -> float:
        return _lowrank_core_norm(self, np.linalg.norm)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = (self - self.adjoint()).hs_norm()
        return diff <= tol * max(self.hs_norm(), 1.0)

    def trace(self) -> complex:
        return complex(np.sum(self.coeffs * np.einsum("bx,bx->b", self.left, self.right.conj())) * self.grid.dx)


def _sqrt_psd(g: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(g)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def cross_gram_core(k: LowRankKernel) -> np.ndarray:
    """``G_X^{1/2} diag(c) G_Y^{1/2}``: same singular values as the operator."""
    dx = k.grid.dx
    gx = (k.left.conj() @ k.left.T) * dx
    gy = (k.right.conj() @ k.right.T) * dx
    return _sqrt_psd(gx) @ np.diag(k.coeffs) @ _sqrt_psd(gy)


def _lowrank_core_norm(k: LowRankKernel, fn) -> float:
    # QR keeps small differences accurate, unlike squared Gram sums
    sq = np.sqrt(k.grid.dx)
    _, rx = np.linalg.qr(k.left.T * sq)
    _, ry = np.linalg.qr(k.right.T * sq)
    core = rx @ np.diag(k.coeffs) @ ry.conj().T
    return float(fn(core))


def trace_norm(k: LowRankKernel) -> float:
    if len(k) < 1:
        raise ValueError("empty kernel")
    return float(np.linalg.svd(cross_gram_core(k), compute_uv=False).sum())


def trace_norm_dense(k: LowRankKernel) -> float:
    """Oracle: singular-value sum of the full matrix."""
    return float(np.linalg.svd(k.dense() * k.grid.dx, compute_uv=False).sum())


@dataclass
class TensorSum:
    """``sum_q w_q A_q^1 (x) ... (x) A_q^k`` with dense per-slot kernels.

    ``slots[j]`` has shape ``(N, P, P)`` for ``N`` summands over ``P`` grid points.
    """

    grid: Grid
    weights: np.ndarray
    slots: List[np.ndarray]

    @property
    def k(self) -> int:
        return len(self.slots)

    @property
    def count(self) -> int:
        return len(self.weights)

    def __add__(self, other: "TensorSum") -> "TensorSum":
        if other.k != self.k:
            raise ValueError("particle numbers differ")
        out = TensorSum(
            self.grid,
            np.concatenate([self.weights, other.weights]),
            [np.concatenate([a, b]) for a, b in zip(self.slots, other.slots)],
        )
        return out.compressed()

    def scaled(self, c: complex) -> "TensorSum":
        return TensorSum(self.grid, c * self.weights, self.slots)

    def __sub__(self, other: "TensorSum") -> "TensorSum":
        return self + other.scaled(-1)

    def compressed(self) -> "TensorSum":
        """A single-particle sum collapses to one dense kernel."""
        if self.k != 1 or self.count <= 1:
            return self
        total = np.tensordot(self.weights, self.slots[0], axes=(0, 0))
        return TensorSum(self.grid, np.ones(1, dtype=complex), [total[None]])

    def hs_norm(self) -> float:
        dx = self.grid.dx
        if self.count == 0:
            return 0.0
        if self.k == 1:
            total = np.tensordot(self.weights, self.slots[0], axes=(0, 0))
            return float(np.linalg.norm(total)) * dx
        if self.k == 2:
            a = self.slots[0].reshape(self.count, -1)
            b = self.slots[1].reshape(self.count, -1)
            _, ra = np.linalg.qr(a.T)
            _, rb = np.linalg.qr(b.T)
            return float(np.linalg.norm(ra @ np.diag(self.weights) @ rb.T)) * dx**2
        g = np.ones((self.count, self.count), dtype=complex)
        for s in self.slots:
            v = s.reshape(self.count, -1)
            g *= v.conj() @ v.T
        val = np.real(self.weights.conj() @ g @ self.weights)
        return float(np.sqrt(max(val, 0.0))) * dx**self.k

    def slot_kernel(self, j: int, q: int = 0) -> np.ndarray:
        return self.slots[j][q]


def tensor_from_lowrank(weight: complex, kernels: Sequence[LowRankKernel]) -> TensorSum:
    grid = kernels[0].grid
    return TensorSum(grid, np.array([weight], dtype=complex), [k.dense()[None] for k in kernels])


def _joint_norms_k2(a: TensorSum, b: TensorSum):
    # one QR per slot serves all three norms
    na = a.count
    wa, wb = a.weights, b.weights
    w = np.concatenate([wa, -wb])
    r = []
    for sa, sb in zip(a.slots, b.slots):
        v = np.concatenate([sa.reshape(na, -1), sb.reshape(b.count, -1)])
        r.append(np.linalg.qr(v.T, mode="r"))
    ra, rb = r
    dx2 = a.grid.dx**2

    def nrm(sel, ww):
        return float(np.linalg.norm((ra[:, sel] * ww) @ rb[:, sel].T)) * dx2

    return (
        nrm(slice(0, na), wa),
        nrm(slice(na, None), wb),
        nrm(slice(None), w),
    )


def distance_report(a: TensorSum, b: TensorSum):
    """``(|a|, |b|, |a - b|)`` in Hilbert-Schmidt norm."""
    if a.k != b.k:
        raise ValueError("particle numbers differ")
    if a.k == 2 and a.count and b.count:
        return _joint_norms_k2(a, b)
    return a.hs_norm(), b.hs_norm(), (a - b).hs_norm()


def relative_distance(a: TensorSum, b: TensorSum) -> float:
    na, nb, diff = distance_report(a, b)
    ref = max(na, nb)
    return diff / ref if ref > 0 else diff


def product_distance_bound(a: Sequence[np.ndarray], b: Sequence[np.ndarray], dx: float) -> float:
    """Telescoping bound on ``|A1(x)...(x)Ak - B1(x)...(x)Bk|_HS`` from per-slot data."""
    na = [np.linalg.norm(x) * dx for x in a]
    nb = [np.linalg.norm(x) * dx for x in b]
    nd = [np.linalg.norm(x - y) * dx for x, y in zip(a, b)]
    total = 0.0
    for j in range(len(a)):
        total += float(np.prod(nb[:j])) * nd[j] * float(np.prod(na[j + 1 :]))
    return total
