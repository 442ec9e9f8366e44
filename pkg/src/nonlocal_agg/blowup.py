"""Least-squares fit of a finite-time singularity g(t) ~ C / (T - t)^a."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .errors import FitDegenerate

MIN_SAMPLES = 8


@dataclass(frozen=True)
class BlowupFit:
    C: float
    T: float
    a: float
    residual: float
    n_samples: int
    t_first: float
    t_last: float


def select_window(t: np.ndarray, g: np.ndarray, window: float = 1.0,
                  onset_factor: float = 2.0) -> np.ndarray:
    """Indices of the samples used for the fit.

    Starts at the first sample where ``g`` reaches ``onset_factor * g[0]``
    and keeps the trailing ``window`` fraction from there on.
    """
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    grown = np.nonzero(g >= onset_factor * g[0])[0]
    if grown.size == 0:
        return grown
    idx = np.arange(grown[0], len(g))
    keep = int(math.ceil(window * idx.size))
    return idx[idx.size - keep:]


def _profile(tau: np.ndarray, logg: np.ndarray, delta: float):
    """Best (log C, a) for a fixed singular time t_last + delta; returns (sse, logC, a)."""
    x = -np.log(delta - tau)
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, logg, rcond=None)
    r = A @ coef - logg
    return float(r @ r), float(coef[0]), float(coef[1])


def blowup_fit(samples, window: float = 1.0, onset_factor: float = 2.0,
               span_factor: float = 2.0, grid_points: int = 400) -> BlowupFit:
    """Fit ``g(t) = C / (T - t)^a`` to the growing tail of a sample series.

    ``samples`` is a sequence of ``(t, g)`` pairs with strictly increasing
    ``t`` and positive ``g``. The singular time is searched on
    ``(t_last, t_last + span_factor * (t_last - t_first)]`` by minimizing the
    linear least-squares residual of ``log g = log C - a log(T - t)``; the
    result is then polished by nonlinear least squares on ``(C, T, a)`` in
    the original scale.

    Raises FitDegenerate when the data show no growth or the residual has no
    interior minimum in ``T``.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (t, g) pairs")
    t, g = arr[:, 0], arr[:, 1]
    if len(t) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(t)}")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ValueError("g must be positive and finite")

    idx = select_window(t, g, window, onset_factor)
    if idx.size < MIN_SAMPLES:
        raise FitDegenerate(
            f"only {idx.size} samples after g grows by {onset_factor}x; no singular growth"
        )
    t, g = t[idx], g[idx]
    t_last = float(t[-1])
    tau = t - t_last  # fit in shifted time so results translate exactly
    logg = np.log(g)
    span = t_last - t[0]

    deltas = span * np.geomspace(1e-9, span_factor, grid_points)
    sse = np.array([_profile(tau, logg, d)[0] for d in deltas])
    i = int(np.argmin(sse))
    if i == len(deltas) - 1:
        raise FitDegenerate("residual decreases up to the end of the T bracket")
    if np.ptp(sse) <= 1e-12 * max(1.0, sse.max()):
        raise FitDegenerate("residual is flat in T")
    lo = math.log(deltas[max(i - 1, 0)])
    hi = math.log(deltas[min(i + 1, len(deltas) - 1)])
    best = minimize_scalar(lambda u: _profile(tau, logg, math.exp(u))[0],
                           bounds=(lo, hi), method="bounded",
                           options={"xatol": 1e-14})
    delta = math.exp(best.x) if best.fun <= sse[i] else deltas[i]
    _, logc, a = _profile(tau, logg, delta)

    def resid(p):
        c, d, aa = p
        return c * (d - tau) ** (-aa) - g

    floor = 1e-3 * delta
    polish = least_squares(
        resid, x0=[math.exp(logc), delta, a],
        bounds=([0.0, floor, 0.0], [np.inf, np.inf, np.inf]),
        method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000,
    )
    c, delta_p, a_p = polish.x
    if polish.success and delta_p > floor and c > 0:
        logc, delta, a = math.log(c), delta_p, a_p
    model = logc - a * np.log(delta - tau)
    rms = float(np.sqrt(np.mean((logg - model) ** 2)))
    return BlowupFit(C=math.exp(logc), T=float(t_last + delta), a=float(a), residual=rms,
                     n_samples=int(idx.size), t_first=float(t[0]), t_last=float(t_last))
