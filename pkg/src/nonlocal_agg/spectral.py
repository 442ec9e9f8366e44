"""Periodic grid, fields, and Fourier-multiplier operators on [-pi, pi).

Conventions
-----------
Nodes are ``x_j = -pi + 2 pi j / n``. Fourier coefficients follow
``f(x_j) = sum_k fhat_k exp(i k x_j)`` for ``k = -n/2 .. n/2 - 1``, so
``fhat_0`` is the mean. Odd multipliers (derivative, Hilbert transform)
zero the Nyquist mode so real input gives real output.

All array-level helpers (``*_values``) operate on plain ndarrays and are
used by the right-hand-side assembly; the Field-level functions wrap them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec
from scipy.interpolate import make_interp_spline

from .errors import InvalidAlpha, QuadratureFailure

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of ``n`` nodes on the torus [-pi, pi)."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 16, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @cached_property
    def h(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -np.pi + self.h * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Wavenumbers 0..n/2 matching ``numpy.fft.rfft`` ordering."""
        k = np.arange(self.n // 2 + 1, dtype=float)
        k.flags.writeable = False
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on rfft modes: keep |k| < n/3."""
        m = self.rwavenumbers < self.n / 3.0
        m.flags.writeable = False
        return m

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return Field(self, func(self.nodes))

    def constant(self, c: float) -> "Field":
        return Field(self, np.full(self.n, float(c)))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a periodic function on a PeriodicGrid. Immutable."""

    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._other(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __len__(self):
        return self.grid.n


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex coefficients ordered k = -n/2 .. n/2-1."""

    grid: PeriodicGrid
    coeffs: np.ndarray = field(repr=False)

    @property
    def wavenumbers(self) -> np.ndarray:
        n = self.grid.n
        return np.arange(-n // 2, n // 2)

    def mode(self, k: int) -> complex:
        n = self.grid.n
        if not -n // 2 <= k < n // 2:
            raise IndexError(k)
        return complex(self.coeffs[k + n // 2])


def to_spectrum(f: Field) -> Spectrum:
    n = f.grid.n
    # fft with the x_0 = -pi offset folded in: exp(-ik x_j) = exp(ik pi) exp(-2 pi i jk/n)
    k = np.fft.fftfreq(n, 1.0 / n)
    c = np.fft.fft(f.values) / n * np.exp(1j * k * np.pi)
    c = np.fft.fftshift(c)
    c.flags.writeable = False
    return Spectrum(f.grid, c)


def from_spectrum(s: Spectrum) -> Field:
    n = s.grid.n
    c = np.fft.ifftshift(np.asarray(s.coeffs))
    k = np.fft.fftfreq(n, 1.0 / n)
    v = np.fft.ifft(c * np.exp(-1j * k * np.pi)) * n
    return Field(s.grid, v.real)


def mean(f: Field) -> float:
    return float(np.mean(f.values))


# -- array-level multipliers ---------------------------------------------------

def _apply(grid: PeriodicGrid, values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    # phase offset cancels for multipliers that depend on k only
    return np.fft.irfft(np.fft.rfft(values) * multiplier, n=grid.n)


def _odd(grid: PeriodicGrid, m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m[0] = 0.0
    m[-1] = 0.0  # Nyquist
    return m


def hilbert_multiplier(grid: PeriodicGrid) -> np.ndarray:
    return _odd(grid, -1j * np.ones_like(grid.rwavenumbers))


def derivative_multiplier(grid: PeriodicGrid) -> np.ndarray:
    return _odd(grid, 1j * grid.rwavenumbers)


def hilbert_values(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    return _apply(grid, values, hilbert_multiplier(grid))


def derivative_values(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    return _apply(grid, values, derivative_multiplier(grid))


def fractional_values(grid: PeriodicGrid, values: np.ndarray, alpha: float) -> np.ndarray:
    return _apply(grid, values, grid.rwavenumbers ** alpha)


def dealias_values(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    return _apply(grid, values, grid.dealias_mask.astype(float))


# -- Field-level operators -----------------------------------------------------

def hilbert_spectral(f: Field) -> Field:
    """Periodic Hilbert transform as the multiplier -i sgn(k)."""
    return Field(f.grid, hilbert_values(f.grid, f.values))


def hilbert_quadrature(f: Field, tol: float = 1e-10, degree: int = 9,
                       limit: int = 20000) -> Field:
    """Periodic Hilbert transform by principal-value quadrature of a spline.

    ``f`` is replaced by its periodic interpolating spline ``S`` of odd
    ``degree`` (3 gives the classical cubic spline). With ``y = x - s`` the
    kernel is odd in ``s``, so subtracting ``S(x)`` cancels and the principal
    value becomes ``(1/2pi) int_0^pi (S(x-s) - S(x+s)) cot(s/2) ds``, whose
    integrand tends to ``-4 S'(x)`` as ``s -> 0``. The integral is computed
    adaptively for all nodes at once, with breakpoints at the spline knots.
    """
    if degree % 2 == 0 or degree < 1:
        raise ValueError("spline degree must be odd")
    grid = f.grid
    x = grid.nodes
    spline = make_interp_spline(
        np.append(x, np.pi), np.append(f.values, f.values[0]),
        k=degree, bc_type="periodic",
    )
    slope = spline.derivative()

    def integrand(s):
        if s == 0.0:
            return -4.0 * slope(x)
        # periodic extrapolation handles x +- s outside [-pi, pi]
        return (spline(x - s) - spline(x + s)) / np.tan(0.5 * s)

    breaks = grid.h * np.arange(1, grid.n // 2)
    res, err, info = quad_vec(
        integrand, 0.0, np.pi, epsabs=tol, epsrel=0.0, norm="max",
        limit=limit, points=breaks, full_output=True,
    )
    if not info.success:
        raise QuadratureFailure(
            f"adaptive quadrature did not converge (status {info.status}, error {err:.3g})"
        )
    return Field(grid, res / TWO_PI)


def derivative(f: Field) -> Field:
    return Field(f.grid, derivative_values(f.grid, f.values))


def fractional_laplacian(f: Field, alpha: float) -> Field:
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(f"alpha must lie in (0, 2], got {alpha}")
    return Field(f.grid, fractional_values(f.grid, f.values, alpha))


def dealias(f: Field) -> Field:
    return Field(f.grid, dealias_values(f.grid, f.values))


def lp_norm(f: Field, p: float = 2.0) -> float:
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((f.grid.h * np.sum(a ** p)) ** (1.0 / p))


def hs_seminorm(f: Field, s: float) -> float:
    """||Lambda^s f||_{L^2}, evaluated on the Fourier side."""
    if s < 0:
        raise ValueError("s must be >= 0")
    n = f.grid.n
    c = np.fft.fft(f.values) / n
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    w = k ** (2.0 * s) if s > 0 else np.ones(n)
    if s > 0:
        w[0] = 0.0
    return float(np.sqrt(TWO_PI * np.sum(w * np.abs(c) ** 2)))
