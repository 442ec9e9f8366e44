"""Operator property suite, run by ``nonlocal-agg check-invariants`` and the tests.

Each check draws seeded random band-limited fields and reports the worst
deviation from an exact identity together with its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diagnostics import lemma_lambda_gap
from .flux import BetaModel, RhsEvaluator
from .poisson import grad_v_fd, grad_v_spectral
from .spectral import (
    Field,
    PeriodicGrid,
    derivative_values,
    fractional_values,
    hilbert_quadrature,
    hilbert_values,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.value:.3e} (tol {self.tol:.1e}) {self.detail}".rstrip()


def random_bandlimited(grid: PeriodicGrid, bandwidth: int, rng: np.random.Generator,
                       mean_zero: bool = False, decay: float = 0.0) -> np.ndarray:
    """Real trigonometric polynomial with modes |k| <= ``bandwidth``.

    Coefficients are standard normal, scaled by ``(1 + k)^-decay``.
    """
    if not 0 < bandwidth < grid.n // 2:
        raise ValueError("bandwidth must lie in (0, n/2)")
    k = np.arange(1, bandwidth + 1)
    scale = (1.0 + k) ** -decay
    a = rng.standard_normal(bandwidth) * scale
    b = rng.standard_normal(bandwidth) * scale
    x = grid.nodes[:, None]
    v = (a * np.cos(k * x) + b * np.sin(k * x)).sum(axis=1)
    if not mean_zero:
        v = v + rng.standard_normal()
    return v


def calderon(grid: PeriodicGrid, rng, count: int = 100) -> CheckResult:
    """(1/2pi)||Hg||^2 = (1/2pi)||g||^2 - <g>^2, relative error."""
    worst = 0.0
    bw = grid.n // 4 - 1
    for _ in range(count):
        g = random_bandlimited(grid, bw, rng)
        lhs = np.mean(hilbert_values(grid, g) ** 2)
        rhs = np.mean(g ** 2) - np.mean(g) ** 2
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return CheckResult("calderon", worst, 1e-10, worst <= 1e-10)


def tricomi(grid: PeriodicGrid, rng, count: int = 100) -> CheckResult:
    """2 H(f Hf) = (Hf)^2 - f^2 nodewise for mean-zero f."""
    worst = 0.0
    bw = grid.n // 4 - 1
    for _ in range(count):
        f = random_bandlimited(grid, bw, rng, mean_zero=True)
        hf = hilbert_values(grid, f)
        lhs = 2.0 * hilbert_values(grid, f * hf)
        worst = max(worst, float(np.max(np.abs(lhs - (hf ** 2 - f ** 2)))))
    return CheckResult("tricomi", worst, 1e-8, worst <= 1e-8)


def composition(grid: PeriodicGrid, rng, count: int = 100) -> CheckResult:
    """Lambda = H d/dx = d/dx H, relative to ||Lambda g||_inf."""
    worst = 0.0
    bw = grid.n // 4 - 1
    for _ in range(count):
        g = random_bandlimited(grid, bw, rng)
        lam = fractional_values(grid, g, 1.0)
        a = hilbert_values(grid, derivative_values(grid, g))
        b = derivative_values(grid, hilbert_values(grid, g))
        scale = max(np.max(np.abs(lam)), 1.0)
        worst = max(worst, float(max(np.max(np.abs(a - lam)), np.max(np.abs(b - lam)))) / scale)
    return CheckResult("lambda=H*dx=dx*H", worst, 1e-10, worst <= 1e-10)


def antisymmetry(grid: PeriodicGrid, rng, count: int = 100) -> CheckResult:
    worst = 0.0
    bw = grid.n // 4 - 1
    for _ in range(count):
        f = random_bandlimited(grid, bw, rng)
        g = random_bandlimited(grid, bw, rng)
        a = grid.h * np.dot(f, hilbert_values(grid, g))
        b = -grid.h * np.dot(g, hilbert_values(grid, f))
        scale = grid.h * np.linalg.norm(f) * np.linalg.norm(g)
        worst = max(worst, abs(a - b) / scale)
    return CheckResult("H anti-self-adjoint", worst, 1e-10, worst <= 1e-10)


def cordoba(grid: PeriodicGrid, rng, count: int = 100) -> CheckResult:
    """min_j (2 g Lambda g - Lambda g^2) / ||g||_inf^2 for positive band-limited g."""
    worst = math.inf
    bw = grid.n // 4 - 1
    for _ in range(count):
        g = random_bandlimited(grid, bw, rng, mean_zero=True, decay=1.5)
        g = g - g.min() + 0.1
        gap = 2 * g * fractional_values(grid, g, 1.0) - fractional_values(grid, g * g, 1.0)
        worst = min(worst, float(gap.min()) / float(np.max(g)) ** 2)
    return CheckResult("cordoba", worst, -1e-8, worst >= -1e-8, "(min normalized gap)")


def hilbert_backends(grid: PeriodicGrid, f: np.ndarray, tol: float = 1e-6,
                     name: str = "hilbert quadrature vs spectral") -> CheckResult:
    fld = Field(grid, f)
    err = float(np.max(np.abs(hilbert_quadrature(fld).values - hilbert_values(grid, f))))
    return CheckResult(name, err, tol, err <= tol)


def fd_poisson_order(source: Callable[[PeriodicGrid], Field],
                     sizes=(64, 128, 256, 512)) -> tuple[list[float], list[float]]:
    """L-inf errors of the finite-difference gradient against the spectral one,
    and the observed orders between successive sizes."""
    errs = []
    for n in sizes:
        grid = PeriodicGrid(n)
        rho = source(grid).values
        errs.append(float(np.max(np.abs(grad_v_fd(grid, rho)[0] - grad_v_spectral(grid, rho)))))
    orders = [math.log(errs[i] / errs[i + 1], sizes[i + 1] / sizes[i]) for i in range(len(errs) - 1)]
    return errs, orders


def steady_state(grid: PeriodicGrid, rng) -> CheckResult:
    worst = 0.0
    for m in (BetaModel.power(2.0), BetaModel.log_smooth(), BetaModel.linear(0.5),
              BetaModel.constant(1.0)):
        e = RhsEvaluator(grid, m)
        c = abs(rng.standard_normal()) + 0.1
        worst = max(worst, float(np.max(np.abs(e(np.full(grid.n, c))))))
    return CheckResult("rhs(const) = 0", worst, 0.0, worst == 0.0)


def lambda_lemma(grid: PeriodicGrid, widths=(0.15, 0.25, 0.4, 0.6, 0.8)) -> CheckResult:
    """(Lambda rho)(x*) >= rho(x*)^2 / (4 pi^2 <rho>) at the argmax, on narrow bumps
    that satisfy max rho >= 4 <rho>."""
    worst = math.inf
    for w in widths:
        rho = grid.sample(lambda x: np.exp(-(x / w) ** 2) + 1e-3)
        gap = lemma_lambda_gap(rho)
        if gap is None:
            continue
        worst = min(worst, gap / max(1.0, float(np.max(rho.values)) ** 2))
    return CheckResult("lambda lemma", worst, -1e-6, worst >= -1e-6, "(min normalized gap)")


def run_all(n: int = 256, seed: int = 0, count: int = 100) -> list[CheckResult]:
    from .scenarios import build_initial_bump

    grid = PeriodicGrid(n)
    rng = np.random.default_rng(seed)
    bump = build_initial_bump(grid)
    out = [
        calderon(grid, rng, count),
        tricomi(grid, rng, count),
        composition(grid, rng, count),
        antisymmetry(grid, rng, count),
        cordoba(grid, rng, count),
        steady_state(grid, rng),
        hilbert_backends(grid, bump.values, name="hilbert quadrature vs spectral (bump)"),
        lambda_lemma(grid),
    ]
    _, orders = fd_poisson_order(build_initial_bump)
    dev = max(abs(o - 2.0) for o in orders)
    out.append(CheckResult("fd poisson order (|order - 2|)", dev, 0.2, dev <= 0.2,
                           "orders " + " ".join(f"{o:.3f}" for o in orders)))
    return out
