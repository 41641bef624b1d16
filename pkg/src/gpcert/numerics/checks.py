"""Numerical certificates for the exact identities of the Duhamel expansion."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..boardgame import (
    CollapseMap,
    EchelonClass,
    MoveNotApplicable,
    apply_move,
    enumerate_collapse_maps,
    identity_perm,
    move_applicable,
    partition_classes,
)
from .evaluate import jk_integral, jk_slots
from .grid import Grid, GridField, gaussian_bump
from .lowrank import TensorSum, distance_report, product_distance_bound
from .quadrature import DEFAULT_ORDER, gauss_interval

TOL_QUADRATURE = 1e-6
TOL_EXACT = 1e-10


@dataclass
class CheckResult:
    check: str
    params: Dict
    residuals: List[float] = field(default_factory=list)
    passed: bool = True
    runtime_ms: float = 0.0
    detail: Dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


def _rel(a: TensorSum, b: TensorSum) -> float:
    na, nb, diff = distance_report(a, b)
    ref = max(na, nb)
    return diff / ref if ref > 0 else diff


def _sum(parts: Sequence[TensorSum]) -> TensorSum:
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


def verify_move_invariance(
    m: CollapseMap,
    col: int,
    phi: GridField,
    t: float,
    q: int = DEFAULT_ORDER,
    tol: float = TOL_QUADRATURE,
    state: str = "free",
) -> CheckResult:
    if not move_applicable(m, col):
        raise MoveNotApplicable(f"no acceptable move at column {col} for {m}")
    start = time.perf_counter()
    m2, pi2 = apply_move(m, None, col)
    a = jk_integral(m, identity_perm(m.r), t, phi, q, state=state)
    b = jk_integral(m2, pi2, t, phi, q, state=state)
    res = _rel(a, b)
    return CheckResult(
        "moves",
        {"k": m.k, "rho": list(m.rho), "col": col, "t": t, "q": q, "n": phi.grid.n},
        [res],
        bool(res < tol),
        (time.perf_counter() - start) * 1e3,
        {"image": list(m2.rho), "pi": list(pi2)},
    )


def class_sides(cls: EchelonClass, phi: GridField, t: float, q: int = DEFAULT_ORDER):
    lhs = _sum([jk_integral(mem, None, t, phi, q) for mem in cls.members])
    rhs = _sum([jk_integral(cls.form, pi, t, phi, q) for pi in cls.perms])
    return lhs, rhs


def verify_resummation(
    k: int, r: int, phi: GridField, t: float, q: int = DEFAULT_ORDER, tol: float = TOL_QUADRATURE
) -> List[CheckResult]:
    """One record per class plus one for the full-sum reconstruction."""
    out = []
    classes = partition_classes(k, r)
    all_rhs = []
    for form, cls in classes.items():
        start = time.perf_counter()
        lhs, rhs = class_sides(cls, phi, t, q)
        all_rhs.append(rhs)
        res = _rel(lhs, rhs)
        out.append(
            CheckResult(
                "resum",
                {"k": k, "r": r, "class": list(form.rho), "size": len(cls), "t": t, "q": q},
                [res],
                bool(res < tol),
                (time.perf_counter() - start) * 1e3,
            )
        )
    start = time.perf_counter()
    direct = _sum([jk_integral(m, None, t, phi, q) for m in enumerate_collapse_maps(k, r)])
    res = _rel(direct, _sum(all_rhs))
    out.append(
        CheckResult(
            "resum-full",
            {"k": k, "r": r, "classes": len(classes), "t": t, "q": q},
            [res],
            bool(res < tol),
            (time.perf_counter() - start) * 1e3,
        )
    )
    return out


def _propagate_dense(g: Grid, K: np.ndarray, dt: float) -> np.ndarray:
    """``U K U*`` for a dense one-particle kernel."""
    if dt == 0:
        return K
    mult = g.propagator(dt).reshape(-1)
    sh = g.shape

    def left(A):
        A = A.reshape(sh + (-1,))
        ax = tuple(range(g.d))
        A = np.fft.ifftn(np.fft.fftn(A, axes=ax) * mult.reshape(sh + (1,)), axes=ax)
        return A.reshape(g.size, -1)

    return left(left(K).conj().T).conj().T


def direct_dense(m: CollapseMap, phi: GridField, times: Sequence[float], state: str = "free") -> List[np.ndarray]:
    """Oracle: dense per-slot kernels built operator by operator, without trees."""
    g = phi.grid
    times = np.asarray(times, dtype=float)
    base = phi.values.reshape(-1)
    if state == "free":
        base = g.ifft(phi.hat * g.propagator(times[m.r])).reshape(-1)
    K0 = np.outer(base, base.conj())
    slots = [K0.copy() for _ in range(m.k + m.r)]
    for col in range(m.r, 0, -1):
        if col < m.r:
            slots = [_propagate_dense(g, K, times[col] - times[col + 1]) for K in slots]
        row = m.rho[col - 1]
        absorbed = slots.pop()
        d = np.diag(absorbed)
        kept = slots[row - 1]
        slots[row - 1] = kept * d[:, None] - kept * d[None, :]
    return [_propagate_dense(g, K, times[0] - times[1]) for K in slots]


def verify_factorization(
    m: CollapseMap, phi: GridField, times: Sequence[float], tol: float = TOL_EXACT
) -> CheckResult:
    start = time.perf_counter()
    tree = [s[0] for s in jk_slots(m, phi, np.asarray(times)[None])]
    direct = direct_dense(m, phi, times)
    dx = phi.grid.dx
    per_slot = []
    for a, b in zip(tree, direct):
        nb = np.linalg.norm(b)
        per_slot.append(float(np.linalg.norm(a - b) / nb) if nb else float(np.linalg.norm(a)))
    bound = product_distance_bound(tree, direct, dx)
    ref = float(np.prod([np.linalg.norm(b) * dx for b in direct]))
    rel_bound = bound / ref if ref else bound
    res = max(max(per_slot), rel_bound)
    return CheckResult(
        "factorize",
        {"k": m.k, "rho": list(m.rho), "times": [float(x) for x in times]},
        [res],
        bool(res < tol),
        (time.perf_counter() - start) * 1e3,
        {"per_slot": per_slot},
    )


def strichartz_ratio(f1: GridField, f2: GridField, f3: GridField, window: float = 1.0, nt: int = 32) -> float:
    """``|(U f1) conj(U f2) (U f3)|_{L2_t L2_x} / (|f1|_H1 |f2|_H1 |f3|_L2)``; 0 for zero data."""
    den = f1.h1_norm() * f2.h1_norm() * f3.l2_norm()
    if den == 0:
        return 0.0
    g = f1.grid
    ts, ws = gauss_interval(0.0, window, nt)
    mult = g.propagator(ts)
    u = [g.ifft(f.hat[None] * mult, 1) for f in (f1, f2, f3)]
    prod = u[0] * u[1].conj() * u[2]
    per_t = np.sum(np.abs(prod.reshape(nt, -1)) ** 2, axis=1) * g.dx
    return float(np.sqrt(np.dot(ws, per_t)) / den)


def strichartz_ratio_probe(sample, window: float = 1.0, nt: int = 32) -> Dict[str, float]:
    """Max and mean ratio over a list of ``(f1, f2, f3)`` triples."""
    ratios = [strichartz_ratio(a, b, c, window, nt) for a, b, c in sample]
    return {"max": max(ratios), "mean": float(np.mean(ratios)), "count": len(ratios)}


def strichartz_refinement(d: int = 3, levels: Sequence[int] = (8, 16), width: float = 0.6, window: float = 1.0):
    """Max ratio for a Gaussian bump triple at each resolution."""
    out = {}
    for n in levels:
        g = Grid(d, n)
        f = gaussian_bump(g, width)
        out[n] = strichartz_ratio_probe([(f, f, f)], window)["max"]
    return out
