"""Text file formats for time series, snapshots and plot data.

All floats are written with 17 significant digits so reading a file back
gives the exact values that were written.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import SERIES_COLUMNS, TimeSeriesRecord
from .errors import IoError


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, text: str) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    except OSError as exc:
        raise IoError(p, "write", exc) from exc
    return p


def _read(path) -> str:
    p = Path(path)
    try:
        return p.read_text()
    except OSError as exc:
        raise IoError(p, "read", exc) from exc


# -- series --------------------------------------------------------------------

def write_series(path, records: Sequence[TimeSeriesRecord]) -> Path:
    times = [r.t for r in records]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("series times must be strictly increasing")
    lines = [",".join(SERIES_COLUMNS)]
    lines += [",".join(fmt(v) for v in r.as_row()) for r in records]
    return _write(path, "\n".join(lines) + "\n")


def read_series(path) -> list[TimeSeriesRecord]:
    rows = list(csv.reader(_read(path).splitlines()))
    if not rows or tuple(rows[0]) != SERIES_COLUMNS:
        raise ValueError(f"{path}: missing or unexpected series header")
    return [TimeSeriesRecord.from_row(r) for r in rows[1:] if r]


# -- snapshots -----------------------------------------------------------------

@dataclass(frozen=True)
class Snapshot:
    t: float
    x: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)


def write_snapshot(path, t: float, x, rho, **meta) -> Path:
    head = {"t": fmt(t), **{k: str(v) for k, v in meta.items()}}
    lines = [f"# {k}: {v}" for k, v in head.items()]
    lines.append("x,rho")
    lines += [f"{fmt(a)},{fmt(b)}" for a, b in zip(x, rho)]
    return _write(path, "\n".join(lines) + "\n")


def read_snapshot(path) -> Snapshot:
    meta: dict[str, str] = {}
    xs, rs = [], []
    for line in _read(path).splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = v.strip()
        elif line and line != "x,rho":
            a, b = line.split(",")
            xs.append(float(a))
            rs.append(float(b))
    if "t" not in meta:
        raise ValueError(f"{path}: snapshot without a time")
    return Snapshot(float(meta.pop("t")), np.array(xs), np.array(rs), meta)


# -- plot data -----------------------------------------------------------------

def write_columns(path, header: Sequence[str], columns: Iterable[Sequence[float]]) -> Path:
    cols = [list(c) for c in columns]
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in zip(*cols)]
    return _write(path, "\n".join(lines) + "\n")


def read_columns(path) -> tuple[list[str], list[np.ndarray]]:
    rows = list(csv.reader(_read(path).splitlines()))
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.size == 0:
        data = np.empty((0, len(header)))
    return header, [data[:, i] for i in range(len(header))]


def write_text(path, text: str) -> Path:
    return _write(path, text)


def read_text(path) -> str:
    return _read(path)
