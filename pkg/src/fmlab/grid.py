"""Uniform grids on [-L, L), sampled functions, and the integral-scaled DFT.

Transform convention (non-unitary):

    (F u)(xi) = int u(x) exp(-i x xi) dx,
    (F^-1 v)(x) = (1 / 2 pi) int v(xi) exp(i x xi) dxi.

Both are discretized with left-endpoint Riemann sums on the grid nodes
``x_n = -L + n h`` and the frequencies ``xi_k = pi k / L``,
``k = -N/2 .. N/2 - 1``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class WrapAroundWarning(RuntimeWarning):
    """Convolution support exceeds the representable window."""


def _frozen(values, dtype=complex):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"half width must be positive, got {self.L}")
        n = int(self.N)
        if n != self.N or n < 8 or n & (n - 1):
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", n)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    @property
    def xi(self) -> np.ndarray:
        return self.dxi * self.k

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    def index_of(self, x0: float) -> int:
        """Index of the node nearest to ``x0``."""
        return int(np.clip(np.rint((x0 + self.L) / self.h), 0, self.N - 1))

    def sample(self, func) -> "SampledFunction":
        return SampledFunction(self, func(self.x))

    def zeros(self) -> "SampledFunction":
        return SampledFunction(self, np.zeros(self.N))


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _same_grid(self, other)
        return SampledFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        _same_grid(self, other)
        return SampledFunction(self.grid, self.values - other.values)

    def scale(self, c) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def support_indices(self, tol: float = 0.0) -> np.ndarray:
        return np.flatnonzero(np.abs(self.values) > tol)


@dataclass(frozen=True)
class Spectrum:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} spectral values, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi


def _same_grid(f, g):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def _phase(grid: Grid) -> np.ndarray:
    # exp(i L xi_k) = (-1)^k accounts for the -L offset of the first node
    return np.where(grid.k % 2 == 0, 1.0, -1.0)


def forward_transform(f: SampledFunction) -> Spectrum:
    """Riemann-sum Fourier transform ``h sum_n f(x_n) exp(-i x_n xi_k)``."""
    g = f.grid
    spec = g.h * _phase(g) * np.fft.fftshift(np.fft.fft(f.values))
    return Spectrum(g, spec)


def inverse_transform(s: Spectrum) -> SampledFunction:
    """``(dxi / 2 pi) sum_k S_k exp(i x_n xi_k)``; exact inverse of ``forward_transform``."""
    g = s.grid
    vals = np.fft.ifft(np.fft.ifftshift(s.values * _phase(g))) / g.h
    return SampledFunction(g, vals)


def convolve(f: SampledFunction, g: SampledFunction, warn: bool = True,
             method: str = "fft") -> SampledFunction:
    """Linear convolution ``int f(y) g(x - y) dy`` at the grid nodes.

    Zero-pads to 2N so no periodic wrap-around enters the result; a
    ``WrapAroundWarning`` is raised when the exact result would extend past
    the grid window and is therefore truncated. ``method="direct"`` sums in
    O(N^2) and keeps relative accuracy where the result is tiny, which
    matters once it is multiplied by a rapidly growing weight.
    """
    _same_grid(f, g)
    grid = f.grid
    n = grid.N
    if method == "fft":
        full = np.fft.ifft(np.fft.fft(f.values, 2 * n) * np.fft.fft(g.values, 2 * n))
    elif method == "direct":
        full = np.convolve(f.values, g.values)
    else:
        raise ValueError(f"unknown method {method!r}")
    # node x_n - x_m sits at index n - m + N/2 of g
    out = grid.h * full[n // 2: n // 2 + n]
    if warn:
        sf, sg = f.support_indices(), g.support_indices()
        if sf.size and sg.size:
            lo = sf[0] + sg[0] - n // 2
            hi = sf[-1] + sg[-1] - n // 2
            if lo < 0 or hi > n - 1:
                warnings.warn(
                    f"convolution support [{lo}, {hi}] exceeds grid index range [0, {n - 1}]",
                    WrapAroundWarning,
                    stacklevel=2,
                )
    return SampledFunction(grid, out)


def indicator(grid: Grid, a: float, b: float) -> SampledFunction:
    """Samples of chi_[a,b]; nodes that hit an endpoint exactly get 1/2."""
    x = grid.x
    tol = 1e-12 * grid.h
    vals = ((x > a + tol) & (x < b - tol)).astype(float)
    vals[np.abs(x - a) <= tol] = 0.5
    vals[np.abs(x - b) <= tol] = 0.5
    return SampledFunction(grid, vals)


def gaussian(grid: Grid, sigma: float = 1.0, center: float = 0.0) -> SampledFunction:
    return grid.sample(lambda x: np.exp(-0.5 * ((x - center) / sigma) ** 2))
