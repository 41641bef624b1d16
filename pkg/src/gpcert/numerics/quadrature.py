"""Iterated Gauss-Legendre rules on ordered time simplices."""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

DEFAULT_ORDER = 8
DEFAULT_MAX_DEPTH = 4


class DepthExceededError(ValueError):
    pass


def gauss_interval(a: float, b: float, q: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def simplex_nodes(r: int, t: float, q: int = DEFAULT_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes ``S`` of shape ``(q**r, r)`` with ``t >= S[:,0] >= ... >= S[:,r-1] >= 0``."""
    x, w = np.polynomial.legendre.leggauss(q)
    u, v = 0.5 * (x + 1.0), 0.5 * w
    nodes = np.full((1, 0), 0.0)
    weights = np.ones(1)
    upper = np.full(1, float(t))
    for _ in range(r):
        s = (upper[:, None] * u[None, :]).reshape(-1)
        wt = (weights[:, None] * upper[:, None] * v[None, :]).reshape(-1)
        nodes = np.hstack([np.repeat(nodes, q, axis=0), s[:, None]])
        weights, upper = wt, s
    return nodes, weights


def permuted_times(
    r: int, t: float, pi: Optional[Sequence[int]] = None, q: int = DEFAULT_ORDER
) -> Tuple[np.ndarray, np.ndarray]:
    """Times ``(N, r+1)`` (column 0 is the horizon) on the region ``t >= t_pi(1) >= ... >= t_pi(r)``."""
    if pi is None:
        pi = range(1, r + 1)
    pi = tuple(pi)
    if sorted(pi) != list(range(1, r + 1)):
        raise ValueError(f"{pi} is not a permutation of 1..{r}")
    s, w = simplex_nodes(r, t, q)
    times = np.empty((len(w), r + 1))
    times[:, 0] = t
    for i, p in enumerate(pi):
        times[:, p] = s[:, i]
    return times, w


def simplex_integrate(
    r: int,
    t: float,
    pi: Optional[Sequence[int]],
    f: Callable[[np.ndarray], np.ndarray],
    q: int = DEFAULT_ORDER,
    max_depth: int = DEFAULT_MAX_DEPTH,
):
    """Integrate a node-vectorized ``f`` over the ordered region.

    ``f`` receives times of shape ``(N, r+1)`` and returns an array whose first
    axis runs over the ``N`` nodes.
    """
    if r > max_depth:
        raise DepthExceededError(f"depth {r} exceeds the cap {max_depth}")
    if r < 1:
        raise ValueError("depth must be >= 1")
    times, w = permuted_times(r, t, pi, q)
    vals = np.asarray(f(times))
    return np.tensordot(w, vals, axes=(0, 0))


def simplex_volume(r: int, t: float) -> float:
    return t**r / math.factorial(r)


def monte_carlo_simplex(
    r: int, t: float, f: Callable[[np.ndarray], np.ndarray], samples: int, rng: np.random.Generator
) -> Tuple[complex, float]:
    """Sorted-uniform Monte-Carlo estimate and its standard error (scalar ``f``)."""
    s = -np.sort(-rng.uniform(0.0, t, size=(samples, r)), axis=1)
    times = np.hstack([np.full((samples, 1), t), s])
    vals = np.asarray(f(times)) * simplex_volume(r, t)
    return complex(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))
