"""Periodic spectral grid, free propagation and the split-step NLS flow.

Sign convention: ``exp(i t Laplacian)`` is the Fourier multiplier
``exp(-i t |xi|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_NLS_STEPS = 10**7


@dataclass(frozen=True)
class Grid:
    d: int = 1
    n: int = 64
    L: float = 2 * math.pi

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.n}")
        if self.L <= 0:
            raise ValueError("box length must be positive")

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def dx(self) -> float:
        """Volume element of one grid cell."""
        return (self.L / self.n) ** self.d

    @cached_property
    def freqs_1d(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=self.L / (2 * math.pi * self.n))

    @cached_property
    def xi(self):
        return np.meshgrid(*([self.freqs_1d] * self.d), indexing="ij")

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(x**2 for x in self.xi)

    @cached_property
    def coords(self):
        x = np.arange(self.n) * (self.L / self.n)
        return np.meshgrid(*([x] * self.d), indexing="ij")

    def fft(self, a, batch: int = 0):
        return np.fft.fftn(a, axes=tuple(range(batch, batch + self.d)))

    def ifft(self, a, batch: int = 0):
        return np.fft.ifftn(a, axes=tuple(range(batch, batch + self.d)))

    def propagator(self, dt) -> np.ndarray:
        """Multiplier for ``exp(i dt Laplacian)``; ``dt`` may be an array of times."""
        dt = np.asarray(dt, dtype=float)
        return np.exp(-1j * dt.reshape(dt.shape + (1,) * self.d) * self.k2)

    def inner(self, f, g) -> complex:
        return complex(np.vdot(f, g) * self.dx)


class GridField:
    """Complex samples on a grid with lazily cached Fourier coefficients."""

    __slots__ = ("grid", "values", "_hat")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self._hat = None

    @classmethod
    def from_hat(cls, grid: Grid, hat) -> "GridField":
        f = cls(grid, grid.ifft(hat))
        return f

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            h = self.grid.fft(self.values)
            h.setflags(write=False)
            self._hat = h
        return self._hat

    def l2_norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.grid.dx)

    def h1_norm(self) -> float:
        w = (1.0 + self.grid.k2) * np.abs(self.hat) ** 2
        return math.sqrt(float(np.sum(w)) * self.grid.dx / self.grid.size)

    def grad_norm(self) -> float:
        w = self.grid.k2 * np.abs(self.hat) ** 2
        return math.sqrt(float(np.sum(w)) * self.grid.dx / self.grid.size)

    def lp_norm(self, p: float) -> float:
        return float(np.sum(np.abs(self.values) ** p) * self.grid.dx) ** (1.0 / p)

    def scaled(self, c: complex) -> "GridField":
        return GridField(self.grid, c * self.values)

    def __repr__(self):
        return f"GridField(d={self.grid.d}, n={self.grid.n}, l2={self.l2_norm():.3g})"


def free_propagate(f: GridField, dt: float) -> GridField:
    if dt == 0:
        return f
    return GridField.from_hat(f.grid, f.hat * f.grid.propagator(dt))


def nls_flow(f: GridField, lam: int, t: float, dt: float, max_steps: int = MAX_NLS_STEPS) -> GridField:
    """Strang splitting for ``i phi_t = -Laplacian phi + lam |phi|^2 phi``.

    The nonlinear substep ``phi exp(-i lam |phi|^2 h)`` is solved exactly, so the
    mass is conserved to round-off.
    """
    if lam not in (1, -1):
        raise ValueError("lam must be +1 or -1")
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")
    if t == 0:
        return f
    steps = math.ceil(t / dt - 1e-9)
    if steps > max_steps:
        raise OverflowError(f"{steps} steps exceed the cap {max_steps}")
    h = t / steps
    g = f.grid
    lin = g.propagator(h)
    u = np.array(f.values)
    u *= np.exp(-0.5j * lam * h * np.abs(u) ** 2)
    for i in range(steps):
        u = g.ifft(g.fft(u) * lin)
        # merge the two adjacent half nonlinear steps except at the end
        tau = h if i < steps - 1 else 0.5 * h
        u *= np.exp(-1j * lam * tau * np.abs(u) ** 2)
    return GridField(g, u)


def energy(f: GridField, lam: int) -> float:
    return 0.5 * f.grad_norm() ** 2 + 0.25 * lam * f.lp_norm(4) ** 4


def plane_wave(grid: Grid, amplitude: float = 1.0, mode=1) -> GridField:
    modes = (mode,) * grid.d if isinstance(mode, int) else tuple(mode)
    phase = sum(m * x for m, x in zip(modes, grid.coords))
    return GridField(grid, amplitude * np.exp(1j * phase))


def band_limited(grid: Grid, rng: np.random.Generator, norm: float = 1.0, decay: float = 1.0, kmax=None) -> GridField:
    """Seeded random field with the top third of frequencies removed.

    Coefficients are complex Gaussians damped by ``(1+|xi|^2)^-decay``; the
    result is normalized to the requested L2 norm.
    """
    if kmax is None:
        kmax = grid.n / 3
    hat = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    hat = hat * (1.0 + grid.k2) ** (-decay)
    mask = np.ones(grid.shape, dtype=bool)
    for x in grid.xi:
        mask &= np.abs(x) <= kmax
    hat = np.where(mask, hat, 0.0)
    f = GridField.from_hat(grid, hat)
    nrm = f.l2_norm()
    return f.scaled(norm / nrm) if nrm > 0 else f


def gaussian_bump(grid: Grid, width: float = 0.5) -> GridField:
    c = grid.L / 2
    r2 = sum((x - c) ** 2 for x in grid.coords)
    return GridField(grid, np.exp(-r2 / (2 * width**2)))


def dn_wave(grid: Grid, m: float = 0.5, periods: int = 1):
    """Exact focusing (``lam=-1``) standing wave on a 1-d periodic box.

    Returns ``(phi0, exact)`` where ``exact(t)`` gives the field at time ``t``.
    """
    from scipy.special import ellipj, ellipk

    if grid.d != 1:
        raise ValueError("the dn standing wave is one-dimensional")
    K = float(ellipk(m))
    a = math.sqrt(2.0) * K * periods * 2 * math.pi / (grid.L * math.pi)
    x = grid.coords[0]
    _, _, dn, _ = ellipj(a * x / math.sqrt(2.0), m)
    omega = a * a * (2.0 - m) / 2.0

    def exact(t: float) -> GridField:
        return GridField(grid, a * dn * np.exp(1j * omega * t))

    return exact(0.0), exact
