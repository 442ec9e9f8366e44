"""Diffusion laws beta(rho) and the semi-discrete right-hand side.

The right-hand side is assembled in flux form,

    F(rho) = d/dx ( -beta(rho) H rho + rho dv/dx ),

so its zero Fourier mode vanishes and the discrete mass is conserved.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeDensity, NonFinite, NegativeDensityWarning
from .poisson import grad_v_fd, grad_v_spectral
from .spectral import (
    Field,
    PeriodicGrid,
    dealias_values,
    derivative_values,
    hilbert_quadrature,
    hilbert_values,
)

KINDS = ("constant", "linear", "power", "log")


@dataclass(frozen=True)
class BetaModel:
    """Density-dependent diffusion strength.

    ``constant``: beta = nu; ``linear``: beta = rho + nu; ``power``:
    beta = rho**p; ``log``: beta = log(1 + rho).
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown beta kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "constant" and not self.param > 0:
            raise ValueError("constant beta needs nu > 0")
        if self.kind == "linear" and not self.param >= 0:
            raise ValueError("linear beta needs nu >= 0")
        if self.kind == "power" and not self.param >= 1:
            raise ValueError("power beta needs p >= 1")

    @classmethod
    def constant(cls, nu: float) -> "BetaModel":
        return cls("constant", float(nu))

    @classmethod
    def linear(cls, nu: float) -> "BetaModel":
        return cls("linear", float(nu))

    @classmethod
    def power(cls, p: float) -> "BetaModel":
        return cls("power", float(p))

    @classmethod
    def log_smooth(cls) -> "BetaModel":
        return cls("log", 0.0)

    @classmethod
    def parse(cls, text: str) -> "BetaModel":
        """Parse ``power:2``, ``log``, ``linear:0.5`` or ``constant:1``."""
        name, _, arg = text.strip().partition(":")
        name = name.strip().lower()
        if name == "log":
            if arg.strip():
                raise ValueError("log beta takes no parameter")
            return cls.log_smooth()
        if not arg.strip():
            raise ValueError(f"beta {name!r} needs a parameter, e.g. {name}:1")
        return cls(name, float(arg))

    def __str__(self):
        if self.kind == "log":
            return "log"
        return f"{self.kind}:{self.param:.17g}"

    @property
    def is_polynomial(self) -> bool:
        return self.kind in ("linear", "power")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Vectorised beta on nonnegative densities."""
        if self.kind == "constant":
            return np.full_like(rho, self.param)
        if self.kind == "linear":
            return rho + self.param
        if self.kind == "power":
            return rho * rho if self.param == 2.0 else rho ** self.param
        return np.log1p(rho)

    def monotone_inverse(self, level: float) -> float:
        """Least x >= 0 with beta(x) >= level; inf if beta never reaches it."""
        if level <= self(np.zeros(1))[0]:
            return 0.0
        if self.kind == "constant":
            return math.inf
        if self.kind == "linear":
            return level - self.param
        if self.kind == "power":
            return level ** (1.0 / self.param)
        return math.expm1(level)


def _power_derivative(p: float, x: float, order: int) -> float:
    coef = 1.0
    for i in range(order):
        coef *= p - i
    if coef == 0.0:
        return 0.0
    e = p - order
    if e == 0:
        return coef
    if x == 0.0:
        return 0.0 if e > 0 else math.copysign(math.inf, coef)
    return coef * x ** e


def beta_eval(m: BetaModel, x: float, order: int = 0) -> float:
    """d^order beta / dx^order at x >= 0."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0, 1, 2 or 3")
    if x < 0:
        raise NegativeDensity(f"beta evaluated at negative density {x}")
    if m.kind == "constant":
        return m.param if order == 0 else 0.0
    if m.kind == "linear":
        return (x + m.param, 1.0, 0.0, 0.0)[order]
    if m.kind == "power":
        return _power_derivative(m.param, x, order)
    if order == 0:
        return math.log1p(x)
    return (-1.0) ** (order - 1) * math.factorial(order - 1) / (1.0 + x) ** order


def beta_sup_constants(m: BetaModel, M: float) -> tuple[float, float, float, float]:
    """Suprema of |beta^(i)| over [0, M] for i = 0..3.

    Every supported law has |beta^(i)| monotone on [0, inf), so each supremum
    sits at an endpoint.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    out = []
    for i in range(4):
        a, b = abs(beta_eval(m, 0.0, i)), abs(beta_eval(m, M, i))
        out.append(max(a, b))
    return tuple(out)


@dataclass(frozen=True)
class RhsEvaluator:
    """Evaluates F(rho) = d/dx(-beta(rho) H rho + rho dv/dx) on a fixed grid."""

    grid: PeriodicGrid
    beta: BetaModel
    hilbert_backend: str = "spectral"
    poisson_backend: str = "spectral"
    dealias: bool | None = None
    spline_degree: int = 9
    _dealias: bool = field(init=False, repr=False)

    def __post_init__(self):
        if self.hilbert_backend not in ("spectral", "quadrature"):
            raise ValueError(f"unknown hilbert backend {self.hilbert_backend!r}")
        if self.poisson_backend not in ("spectral", "fd"):
            raise ValueError(f"unknown poisson backend {self.poisson_backend!r}")
        on = self.beta.is_polynomial if self.dealias is None else bool(self.dealias)
        object.__setattr__(self, "_dealias", on)

    @property
    def dealiased(self) -> bool:
        return self._dealias

    def hilbert(self, rho: np.ndarray) -> np.ndarray:
        if self.hilbert_backend == "spectral":
            return hilbert_values(self.grid, rho)
        return hilbert_quadrature(Field(self.grid, rho), degree=self.spline_degree).values

    def grad_v(self, rho: np.ndarray) -> np.ndarray:
        if self.poisson_backend == "spectral":
            return grad_v_spectral(self.grid, rho)
        return grad_v_fd(self.grid, rho)[0]

    def flux(self, rho: np.ndarray) -> np.ndarray:
        g = self.grid
        if self._dealias:
            rho = dealias_values(g, rho)
        h_rho = self.hilbert(rho)
        vx = self.grad_v(rho)
        if self._dealias:
            # spectral backends already return band-limited output
            if self.hilbert_backend != "spectral":
                h_rho = dealias_values(g, h_rho)
            if self.poisson_backend != "spectral":
                vx = dealias_values(g, vx)
        if rho.min() < 0:
            warnings.warn("negative density clamped to 0 for beta",
                          NegativeDensityWarning, stacklevel=2)
            b = self.beta(np.maximum(rho, 0.0))
        else:
            b = self.beta(rho)
        q = -b * h_rho + rho * vx
        if self._dealias:
            q = dealias_values(g, q)
        return q

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Array-level right-hand side, for the time integrator."""
        if not np.all(np.isfinite(rho)):
            raise NonFinite("non-finite density entering the right-hand side")
        if rho.max() == rho.min():
            # constants are steady states; skip the transforms so the zero is exact
            return np.zeros_like(rho)
        out = derivative_values(self.grid, self.flux(rho))
        if not np.all(np.isfinite(out)):
            raise NonFinite("non-finite value in the right-hand side")
        return out


def rhs(e: RhsEvaluator, rho: Field) -> Field:
    return Field(rho.grid, e(rho.values))
