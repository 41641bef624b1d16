"""Concrete evaluation of symbolic kernel expressions on a grid.

Evaluation is vectorized over a batch of time nodes: ``times`` has shape
``(N, r+1)`` with column 0 holding the horizon.

The symbol ``phi`` stands for the one-particle function of the state at the
last time ``t_r``.  With ``state="free"`` it is ``exp(i t_r Laplacian) phi``
(the free evolution of the data); with ``state="frozen"`` it is ``phi`` itself
at every node.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..boardgame import CollapseMap, identity_perm
from ..kernels import PHI, PROD, PSI, FactorExpr, OneParticleKernelExpr, assemble_Jk
from .grid import Grid, GridField
from .lowrank import LowRankKernel, TensorSum
from .quadrature import DEFAULT_MAX_DEPTH, DEFAULT_ORDER, DepthExceededError, permuted_times

NODE_CHUNK = 512


class UnboundSymbolError(KeyError):
    pass


class Evaluator:
    """Memoized batched factor evaluation for one binding and one batch of times."""

    def __init__(
        self, phi: GridField, times, psi: Union[GridField, str, None] = "auto", state: str = "free"
    ):
        self.grid: Grid = phi.grid
        self.times = np.atleast_2d(np.asarray(times, dtype=float))
        if state == "free":
            g = self.grid
            self.phi = g.ifft(phi.hat[None] * g.propagator(self.times[:, -1]), 1)
        elif state == "frozen":
            self.phi = phi.values[None]
        else:
            raise ValueError(f"unknown state mode {state!r}")
        if psi is None:
            self.psi = None
        elif isinstance(psi, str):
            if psi != "auto":
                raise ValueError(f"unknown psi binding {psi!r}")
            v = self.phi
            self.psi = np.abs(v) ** 2 * v
        else:
            self.psi = psi.values[None]
        self._memo: Dict[FactorExpr, np.ndarray] = {}

    @property
    def n_nodes(self) -> int:
        return self.times.shape[0]

    def _propagate(self, val: np.ndarray, a: int, b: int) -> np.ndarray:
        ncol = self.times.shape[1]
        if not (0 <= a < ncol and 0 <= b < ncol):
            raise KeyError(f"time index {max(a, b)} missing from the supplied times")
        g = self.grid
        dt = self.times[:, a] - self.times[:, b]
        return g.ifft(g.fft(val, 1) * g.propagator(dt), 1)

    def factor(self, f: FactorExpr) -> np.ndarray:
        hit = self._memo.get(f)
        if hit is not None:
            return hit
        if f.base == PHI:
            val = self.phi
        elif f.base == PSI:
            if self.psi is None:
                raise UnboundSymbolError("psi is unbound")
            val = self.psi
        elif f.base == PROD:
            val = None
            for child, conj in f.children:
                c = self.factor(child)
                c = c.conj() if conj else c
                val = c if val is None else val * c
        else:
            raise UnboundSymbolError(f.base)
        for a, b in f.chain:
            val = self._propagate(val, a, b)
        self._memo[f] = val
        return val

    def arrays(self, expr: OneParticleKernelExpr):
        """``(coeffs (T,), left (N,T,P), right (N,T,P))``."""
        n, p = self.n_nodes, self.grid.size
        left = np.stack([np.broadcast_to(self.factor(l), (n,) + self.grid.shape) for _, l, _ in expr.terms], 1)
        right = np.stack([np.broadcast_to(self.factor(r), (n,) + self.grid.shape) for _, _, r in expr.terms], 1)
        coeffs = np.array([c for c, _, _ in expr.terms], dtype=complex)
        return coeffs, left.reshape(n, -1, p), right.reshape(n, -1, p)

    def dense(self, expr: OneParticleKernelExpr) -> np.ndarray:
        c, l, r = self.arrays(expr)
        return np.matmul(l.transpose(0, 2, 1) * c, r.conj())


def evaluate(expr, phi: GridField, times, psi: Union[GridField, str, None] = "auto", state: str = "free"):
    """Evaluate one expression (or a list) at a single time vector to low-rank kernels."""
    times = np.asarray(times, dtype=float).reshape(1, -1)
    ev = Evaluator(phi, times, psi, state)

    def one(e: OneParticleKernelExpr) -> LowRankKernel:
        c, l, r = ev.arrays(e)
        return LowRankKernel(phi.grid, c, l[0], r[0])

    if isinstance(expr, OneParticleKernelExpr):
        return one(expr)
    return [one(e) for e in expr]


def jk_slots(m: CollapseMap, phi: GridField, times, state: str = "free") -> List[np.ndarray]:
    """Dense per-slot kernels ``(N, P, P)`` of the integrand at a batch of times."""
    trees = assemble_Jk(m).trees
    ev = Evaluator(phi, np.atleast_2d(times), state=state)
    return [ev.dense(e) for e in trees]


def jk_integral(
    m: CollapseMap,
    pi: Optional[Sequence[int]],
    t: float,
    phi: GridField,
    q: int = DEFAULT_ORDER,
    max_depth: int = DEFAULT_MAX_DEPTH,
    state: str = "free",
) -> TensorSum:
    """Quadrature of the integrand over ``t >= t_pi(1) >= ... >= t_pi(r)``."""
    if m.r > max_depth:
        raise DepthExceededError(f"depth {m.r} exceeds the cap {max_depth}")
    if pi is None:
        pi = identity_perm(m.r)
    times, w = permuted_times(m.r, t, pi, q)
    trees = assemble_Jk(m).trees
    total: Optional[TensorSum] = None
    for lo in range(0, len(w), NODE_CHUNK):
        ev = Evaluator(phi, times[lo : lo + NODE_CHUNK], state=state)
        part = TensorSum(phi.grid, w[lo : lo + NODE_CHUNK].astype(complex), [ev.dense(e) for e in trees])
        part = part.compressed()
        total = part if total is None else total + part
    return total
