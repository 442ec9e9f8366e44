"""Initial data, run orchestration and on-disk outputs of a scenario."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from . import formats
from .blowup import BlowupFit, blowup_fit
from .config import RunConfig, dump_config
from .diagnostics import TimeSeriesRecord, record, theoretical_linf_bound
from .errors import FitDegenerate, Unbounded
from .flux import RhsEvaluator
from .rkf import Event, StopReason, integrate
from .spectral import Field, PeriodicGrid

log = logging.getLogger(__name__)

BUMP_HALF_WIDTH = 2.0
DEFAULT_SNAPSHOTS = 8


def _bump_profile(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < BUMP_HALF_WIDTH
    u = x[inside] / BUMP_HALF_WIDTH
    out[inside] = np.exp(-1.0 / (1.0 - u * u))
    return out


@lru_cache(maxsize=None)
def bump_normalization() -> float:
    """(1/2pi) times the integral of the unnormalized bump."""
    val, err = quad(lambda s: float(_bump_profile(np.array([s]))[0]),
                    -BUMP_HALF_WIDTH, BUMP_HALF_WIDTH, epsabs=1e-14, epsrel=1e-14, limit=200)
    if err > 1e-12:
        raise RuntimeError(f"bump normalization quadrature error {err:.3g} too large")
    return val / (2.0 * math.pi)


def build_initial_bump(grid: PeriodicGrid) -> Field:
    """Smooth compactly supported bump on |x| < 2 with unit mean."""
    return Field(grid, _bump_profile(grid.nodes) / bump_normalization())


@dataclass
class ScenarioResult:
    reason: StopReason
    t_stop: float
    records: list[TimeSeriesRecord]
    final: Field
    events: list[Event]
    series_path: Path | None = None
    snapshot_paths: list[Path] = field(default_factory=list)
    fit: BlowupFit | None = None
    fit_error: str | None = None
    linf_bound: float = math.inf
    accepted: int = 0
    rejected: int = 0


def sample_times(t_end: float, every: float) -> list[float]:
    count = int(math.floor(t_end / every * (1 + 1e-12)))
    return [k * every for k in range(1, count + 1)]


def default_snapshot_times(t_stop: float, count: int = DEFAULT_SNAPSHOTS) -> list[float]:
    if t_stop <= 0:
        return [0.0]
    return list(np.linspace(0.0, t_stop, count))


def _nearest(states: dict[float, np.ndarray], t: float) -> float:
    keys = np.fromiter(states, dtype=float)
    return float(keys[np.argmin(np.abs(keys - t))])


def fit_records(records: Sequence[TimeSeriesRecord], window: float = 1.0,
                onset_factor: float = 2.0) -> BlowupFit:
    samples = [(r.t, r.grad_linf) for r in records]
    return blowup_fit(samples, window=window, onset_factor=onset_factor)


def format_fit(fit: BlowupFit | None, error: str | None = None) -> str:
    if fit is None:
        return f"status: degenerate\nreason: {error}\n"
    return "".join(f"{k}: {v}\n" for k, v in (
        ("status", "ok"), ("C", formats.fmt(fit.C)), ("T", formats.fmt(fit.T)),
        ("a", formats.fmt(fit.a)), ("residual", formats.fmt(fit.residual)),
        ("n_samples", fit.n_samples), ("t_first", formats.fmt(fit.t_first)),
        ("t_last", formats.fmt(fit.t_last)),
    ))


def run_scenario(cfg: RunConfig, write: bool = True) -> ScenarioResult:
    """Integrate the bump under ``cfg``, record diagnostics and persist outputs.

    The series holds a row at t = 0, one at every multiple of
    ``sample_every`` reached, and a final row at the stopping time. On a
    blow-up stop the singularity fit is attempted on the gradient column.
    """
    grid = PeriodicGrid(cfg.n)
    rho0 = build_initial_bump(grid)
    evaluator = RhsEvaluator(grid, cfg.beta, cfg.hilbert_backend, cfg.poisson_backend,
                             dealias=cfg.dealias_flag)
    samples = sample_times(cfg.t_end, cfg.sample_every)
    wanted = set(samples) | set(cfg.snapshot_times)
    records = [record(rho0, 0.0, 0.0)]
    states: dict[float, np.ndarray] = {0.0: rho0.values}

    def observe(t, state, outcome):
        if t in wanted:
            records.append(record(state, t, outcome.dt_used))
            states[t] = state.values

    res = integrate(evaluator, rho0, cfg.t_end, cfg.rkf, observers=[observe],
                    stop_times=sorted(wanted),
                    blowup_grad_threshold=cfg.blowup_grad_threshold,
                    blowup_resolution_cells=cfg.blowup_resolution_cells)
    if res.t > records[-1].t:
        records.append(record(res.final, res.t, 0.0))
        states[res.t] = res.final.values

    try:
        bound = theoretical_linf_bound(rho0, cfg.beta)
    except Unbounded:
        bound = math.inf
    peak = max(r.linf for r in records)
    if peak > bound * (1 + 1e-6):
        log.warning("max-principle bound exceeded: %.6g > %.6g", peak, bound)

    out = ScenarioResult(res.reason, res.t, records, res.final, list(res.events),
                         linf_bound=bound, accepted=res.accepted, rejected=res.rejected)
    if res.reason.is_blowup:
        try:
            out.fit = fit_records(records, cfg.fit_window, cfg.fit_onset_factor)
        except (FitDegenerate, ValueError) as exc:
            out.fit_error = str(exc)
            log.warning("blow-up fit failed: %s", exc)

    if write:
        _persist(cfg, out, grid, states)
    return out


def _persist(cfg: RunConfig, out: ScenarioResult, grid: PeriodicGrid,
             states: dict[float, np.ndarray]) -> None:
    root = Path(cfg.output_dir)
    formats.write_text(root / "manifest.cfg", dump_config(cfg))
    out.series_path = formats.write_series(root / "series.csv", out.records)
    chosen = [s for s in cfg.snapshot_times if s <= out.t_stop] or \
        default_snapshot_times(out.t_stop)
    meta = dict(n=cfg.n, beta=cfg.beta,
                backend=f"hilbert={cfg.hilbert_backend} poisson={cfg.poisson_backend}")
    snaps = []
    for i, s in enumerate(chosen):
        key = _nearest(states, s)
        snaps.append(formats.write_snapshot(root / "snapshots" / f"snapshot_{i:03d}.txt",
                                            key, grid.nodes, states[key], **meta))
    out.snapshot_paths = snaps
    status = [
        f"reason: {out.reason.value}",
        f"t_stop: {formats.fmt(out.t_stop)}",
        f"accepted: {out.accepted}",
        f"rejected: {out.rejected}",
        f"linf_bound: {formats.fmt(out.linf_bound)}",
    ] + [f"event: {e.kind} t={formats.fmt(e.t)} value={formats.fmt(e.value)}" for e in out.events]
    formats.write_text(root / "status.txt", "\n".join(status) + "\n")
    if out.reason.is_blowup:
        formats.write_text(root / "fit.txt", format_fit(out.fit, out.fit_error))
    emit_plot_data(out.records, [formats.read_snapshot(p) for p in snaps], root / "plot")


def emit_plot_data(records: Sequence[TimeSeriesRecord], snapshots: Sequence[formats.Snapshot],
                   out_dir) -> list[Path]:
    """Columnar files for external plotting: gradient and sup norm over time, profiles."""
    out = Path(out_dir)
    t = [r.t for r in records]
    paths = [
        formats.write_columns(out / "grad_linf.csv", ("t", "grad_linf"),
                              (t, [r.grad_linf for r in records])),
        formats.write_columns(out / "linf.csv", ("t", "linf"), (t, [r.linf for r in records])),
    ]
    for i, snap in enumerate(snapshots):
        paths.append(formats.write_columns(out / f"profile_{i:03d}.csv", ("x", "rho"),
                                           (snap.x, snap.rho)))
    return paths
