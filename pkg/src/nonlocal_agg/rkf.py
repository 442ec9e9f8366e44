"""Adaptive Runge-Kutta-Fehlberg 4(5) method-of-lines integration."""
from __future__ import annotations

import enum
import inspect
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NonFinite
from .spectral import Field, derivative_values

log = logging.getLogger(__name__)

# Classical Fehlberg pair, nodes 0, 1/4, 3/8, 12/13, 1, 1/2.
C = np.array([0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2])
A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
B5 = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])
B4 = np.array([25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0])


class StopReason(str, enum.Enum):
    COMPLETED = "completed"
    DT_UNDERFLOW = "dt_underflow"
    NON_FINITE = "non_finite"
    BLOWUP_THRESHOLD = "blowup_threshold"
    MAX_STEPS = "max_steps"

    @property
    def is_blowup(self) -> bool:
        return self in (StopReason.DT_UNDERFLOW, StopReason.NON_FINITE,
                        StopReason.BLOWUP_THRESHOLD)


@dataclass(frozen=True)
class RkfConfig:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    safety: float = 0.9
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class StepOutcome:
    accepted: bool
    t_new: float
    dt_used: float
    err_est: float
    dt_next: float


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    value: float = float("nan")


class IntegrationResult(NamedTuple):
    final: Field | np.ndarray
    reason: StopReason
    events: list
    t: float
    accepted: int
    rejected: int


def rkf45_step(f: Callable, y: np.ndarray, t: float, dt: float,
               abs_tol: float = 1e-8, rel_tol: float = 1e-8):
    """One Fehlberg step of ``y' = f(t, y)``.

    Returns the 4th- and 5th-order solutions and the weighted RMS norm of
    their difference, with per-component weights
    ``abs_tol + rel_tol * max(|y|, |y5|)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = np.asarray(y, dtype=float)
    k = []
    for i in range(6):
        yi = y
        for a, kj in zip(A[i], k):
            yi = yi + (dt * a) * kj
        ki = np.asarray(f(t + C[i] * dt, yi), dtype=float)
        if not np.all(np.isfinite(ki)):
            raise NonFinite(f"stage {i + 1} produced a non-finite value")
        k.append(ki)
    y5 = y + dt * sum(b * kj for b, kj in zip(B5, k) if b)
    y4 = y + dt * sum(b * kj for b, kj in zip(B4, k) if b)
    w = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
    err = float(np.sqrt(np.mean(((y5 - y4) / w) ** 2)))
    return y4, y5, err


def adapt_dt(err_est: float, dt: float, cfg: RkfConfig) -> float:
    if err_est < 0:
        raise ValueError("err_est must be >= 0")
    if err_est == 0:
        return min(4.0 * dt, cfg.dt_max)
    fac = min(max(cfg.safety * err_est ** -0.2, 0.25), 4.0)
    return min(max(dt * fac, cfg.dt_min), cfg.dt_max)


def _as_rhs(f) -> Callable:
    """Adapt an autonomous ``f(y)`` (e.g. an RhsEvaluator) to ``f(t, y)``."""
    try:
        nparams = len(inspect.signature(f).parameters)
    except (TypeError, ValueError):
        nparams = 1
    return f if nparams >= 2 else (lambda t, y: f(y))


def integrate(
    f,
    rho0: Field | np.ndarray,
    t_end: float,
    cfg: RkfConfig = RkfConfig(),
    observers: Iterable[Callable] = (),
    stop_times: Sequence[float] = (),
    blowup_grad_threshold: float = 1e6,
    blowup_resolution_cells: float = 0.0,
) -> IntegrationResult:
    """Advance ``rho0`` to ``t_end`` with adaptive RKF45 steps.

    ``f`` is either autonomous, ``f(y)``, or ``f(t, y)``. Every accepted
    step calls ``observer(t, state, outcome)``; steps are shortened to land
    exactly on each of ``stop_times`` and on ``t_end``.

    When ``rho0`` is a Field, the run stops with BLOWUP_THRESHOLD once
    ``max|d rho/dx|`` exceeds ``blowup_grad_threshold`` or, if
    ``blowup_resolution_cells > 0``, once the steepest front
    ``max|rho| / max|d rho/dx|`` is narrower than that many grid cells.
    """
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    fun = _as_rhs(f)
    grid = rho0.grid if isinstance(rho0, Field) else None
    wrap = (lambda v: Field(grid, v)) if grid is not None else (lambda v: v.copy())
    y = np.array(rho0.values if grid is not None else rho0, dtype=float)
    observers = tuple(observers)
    events: list[Event] = []

    targets = sorted({float(s) for s in stop_times if 0.0 < s < t_end} | {float(t_end)})
    ti = 0
    t = 0.0
    dt = min(cfg.dt_init, t_end) if t_end > 0 else cfg.dt_init
    accepted = rejected = 0
    worst_neg = 0.0
    reason = StopReason.COMPLETED

    while t < t_end:
        if accepted + rejected >= cfg.max_steps:
            reason = StopReason.MAX_STEPS
            break
        while targets[ti] <= t:
            ti += 1
        target = targets[ti]
        dt_try = dt
        landing = t + dt_try >= target - 1e-12 * max(1.0, abs(target))
        if landing:
            dt_try = target - t
        try:
            _, y5, err = rkf45_step(fun, y, t, dt_try, cfg.abs_tol, cfg.rel_tol)
        except NonFinite as exc:
            events.append(Event(t, "non_finite"))
            log.warning("integration stopped at t=%.6g: %s", t, exc)
            reason = StopReason.NON_FINITE
            break
        ok = err <= 1.0
        dt_next = adapt_dt(err, dt_try, cfg)
        if ok and landing:
            # a shortened landing step must not shrink the controller's proposal
            dt_next = min(max(dt_next, dt), cfg.dt_max)
        if not ok:
            rejected += 1
            if dt_try <= cfg.dt_min * (1 + 1e-9) and not landing:
                events.append(Event(t, "dt_underflow", dt_try))
                reason = StopReason.DT_UNDERFLOW
                break
            dt = dt_next
            continue

        t = target if landing else t + dt_try
        y = y5
        accepted += 1
        dt = dt_next
        outcome = StepOutcome(True, t, dt_try, err, dt_next)
        if observers:
            state = wrap(y)
            for obs in observers:
                obs(t, state, outcome)

        low = float(y.min())
        if low < 0 and (worst_neg == 0 or low < 10.0 * worst_neg):
            events.append(Event(t, "negative_density", low))
            worst_neg = low

        if grid is not None:
            g = float(np.max(np.abs(derivative_values(grid, y))))
            limit = blowup_grad_threshold
            if blowup_resolution_cells > 0:
                limit = min(limit, float(np.max(np.abs(y))) / (blowup_resolution_cells * grid.h))
            if g > limit:
                events.append(Event(t, "blowup_threshold", g))
                reason = StopReason.BLOWUP_THRESHOLD
                break

    final = wrap(y)
    log.info("integration finished: %s at t=%.6g (%d accepted, %d rejected)",
             reason.value, t, accepted, rejected)
    return IntegrationResult(final, reason, events, t, accepted, rejected)
