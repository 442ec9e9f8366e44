"""Periodic Poisson solve d^2 v/dx^2 = rho - <rho> for the attraction velocity dv/dx."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SingularSystem
from .spectral import Field, PeriodicGrid, derivative_values


@dataclass(frozen=True)
class PoissonSolution:
    grad_v: Field
    v: Field


def grad_v_spectral(grid: PeriodicGrid, rho: np.ndarray) -> np.ndarray:
    """dv/dx directly: multiplier (ik)(-1/k^2) = -i/k, zero at k=0 and Nyquist."""
    k = grid.rwavenumbers
    m = np.zeros(k.shape, dtype=complex)
    m[1:-1] = -1j / k[1:-1]
    return np.fft.irfft(np.fft.rfft(rho) * m, n=grid.n)


def solve_poisson_spectral(rho: Field) -> PoissonSolution:
    grid = rho.grid
    k = grid.rwavenumbers
    m = np.zeros(k.shape)
    m[1:] = -1.0 / k[1:] ** 2
    v = np.fft.irfft(np.fft.rfft(rho.values) * m, n=grid.n)
    return PoissonSolution(Field(grid, derivative_values(grid, v)), Field(grid, v))


@lru_cache(maxsize=16)
def _fd_factor(n: int):
    """LU factors of the periodic second-difference matrix bordered by the gauge sum(v) = 0."""
    h = 2.0 * np.pi / n
    main = np.full(n, -2.0 / h**2)
    off = np.full(n - 1, 1.0 / h**2)
    lap = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    lap[0, n - 1] = 1.0 / h**2
    lap[n - 1, 0] = 1.0 / h**2
    ones = np.ones((n, 1))
    bordered = sp.bmat([[lap.tocsr(), sp.csr_matrix(ones)],
                        [sp.csr_matrix(ones.T), None]], format="csc")
    return splu(bordered)


def grad_v_fd(grid: PeriodicGrid, rho: np.ndarray,
              subtract_mean: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Second-order finite-difference ``(dv/dx, v)`` with gauge ``sum(v) = 0``.

    With ``subtract_mean=False`` the source is used as given and must
    already have zero mean.
    """
    n = grid.n
    rhs = rho - rho.mean() if subtract_mean else np.asarray(rho, dtype=float)
    if abs(rhs.mean()) > 1e-12 * max(1.0, np.abs(rho).max()):
        raise SingularSystem(f"compatibility violated: mean of source is {rhs.mean():.3e}")
    sol = _fd_factor(n).solve(np.append(rhs, 0.0))
    v = sol[:n]
    grad = (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * grid.h)
    return grad, v


def solve_poisson_fd(rho: Field) -> PoissonSolution:
    grad, v = grad_v_fd(rho.grid, rho.values)
    return PoissonSolution(Field(rho.grid, grad), Field(rho.grid, v))
