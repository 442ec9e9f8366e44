"""Per-step monitors and the analytic bounds they are checked against."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import LambdaTooSmall, Unbounded
from .flux import BetaModel, beta_sup_constants
from .spectral import (
    TWO_PI,
    Field,
    derivative,
    fractional_laplacian,
    hs_seminorm,
    lp_norm,
    mean,
)

SERIES_COLUMNS = ("t", "mass", "linf", "min", "grad_linf", "lambda_linf", "h_half", "l2", "dt")


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    mass: float
    linf: float
    min_val: float
    grad_linf: float
    lambda_linf: float
    h_half: float
    l2: float
    dt: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    @classmethod
    def from_row(cls, row) -> "TimeSeriesRecord":
        return cls(*(float(v) for v in row))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["min"] = d.pop("min_val")
        return {k: d[k] for k in SERIES_COLUMNS}


def record(rho: Field, t: float, dt: float) -> TimeSeriesRecord:
    v = rho.values
    return TimeSeriesRecord(
        t=float(t),
        mass=TWO_PI * mean(rho),
        linf=float(np.abs(v).max()),
        min_val=float(v.min()),
        grad_linf=lp_norm(derivative(rho), math.inf),
        lambda_linf=lp_norm(fractional_laplacian(rho, 1.0), math.inf),
        h_half=hs_seminorm(rho, 0.5),
        l2=lp_norm(rho, 2),
        dt=float(dt),
    )


def theoretical_linf_bound(rho0: Field, m: BetaModel) -> float:
    """Max-principle bound on ||rho(t)||_inf, or ``math.inf`` when unbounded.

    Least alpha >= max(||rho0||_inf, 4<rho0>) with beta(alpha) >= 4 pi^2 <rho0>.
    Every supported law is nondecreasing, so alpha has a closed form.
    """
    avg = mean(rho0)
    floor = max(float(np.abs(rho0.values).max()), 4.0 * avg)
    reach = m.monotone_inverse(4.0 * math.pi**2 * avg)
    return max(floor, reach)


def prop_max2_bound(rho0: Field, m: BetaModel, nu: float, R: float) -> float | None:
    """Return ``R`` when the small-mass bound applies, else ``None``.

    Requires ||rho0||_{L^1} < nu / (2 pi) and beta(x) >= nu for all x >= R.
    """
    if lp_norm(rho0, 1) >= nu / TWO_PI:
        return None
    if m.kind == "constant":
        holds = m.param >= nu
    else:
        # nondecreasing laws: checking x = R suffices
        holds = float(m(np.array([max(R, 0.0)]))[0]) >= nu * (1.0 - 1e-12)
    return float(R) if holds else None


def global_existence_margin(rho0: Field, m: BetaModel, nu: float, c_s: float = 1.0) -> float:
    """Value of the H^2 decay polynomial at X = ||d^2 rho0/dx^2||_{L^2}.

    Negative means ||d^2 rho/dx^2||_{L^2} is initially decreasing under the
    energy estimate. ``c_s`` is the Sobolev constant, which has no known
    numeric value; results are reported as a function of it.
    """
    if not c_s > 0:
        raise ValueError("c_s must be positive")
    M = theoretical_linf_bound(rho0, m)
    if math.isinf(M):
        raise Unbounded(f"no max-principle bound for beta={m}")
    _, c1, c2, c3 = beta_sup_constants(m, M)
    x = hs_seminorm(rho0, 2.0)
    return (c3 * c_s**3 * x**3
            + (24.0 + math.pi**2 / 2.0) * c_s**2 * c2 * x**2
            + (12.5 * c_s + 33.0 * c_s * c1) * x
            + mean(rho0) - nu)


@dataclass(frozen=True)
class EnergyReport:
    lam: float
    h2_norm: float
    d_linf: float
    energy: float


def energy(rho: Field, lam: float | None = None, rho0: Field | None = None) -> EnergyReport:
    """E[rho] = ||rho||_{H^2} + ||1/(lam - rho)||_inf.

    ``lam`` defaults to ``2 max(||rho0||_inf, ||rho||_inf)``.
    """
    top = float(np.abs(rho.values).max())
    if lam is None:
        ref = top if rho0 is None else max(top, float(np.abs(rho0.values).max()))
        lam = 2.0 * ref if ref > 0 else 1.0
    if lam <= top:
        raise LambdaTooSmall(f"lambda={lam} must exceed ||rho||_inf={top}")
    h2 = math.hypot(lp_norm(rho, 2), hs_seminorm(rho, 2.0))
    d = float(np.max(1.0 / (lam - rho.values)))
    return EnergyReport(lam=float(lam), h2_norm=h2, d_linf=d, energy=h2 + d)


def lemma_lambda_gap(rho: Field) -> float | None:
    """(Lambda rho)(x*) - rho(x*)^2 / (4 pi^2 <rho>) at the discrete argmax x*.

    ``None`` when the hypothesis max rho >= 4 <rho> fails.
    """
    avg = mean(rho)
    j = int(np.argmax(rho.values))
    top = float(rho.values[j])
    if avg <= 0 or top < 4.0 * avg:
        return None
    lam = fractional_laplacian(rho, 1.0).values[j]
    return float(lam - top**2 / (4.0 * math.pi**2 * avg))
