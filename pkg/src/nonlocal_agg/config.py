"""Run configuration: presets, flat ``key = value`` files, and the manifest."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError, IoError
from .flux import BetaModel
from .rkf import RkfConfig

HILBERT_BACKENDS = ("spectral", "quadrature")
POISSON_BACKENDS = ("spectral", "fd")
DEALIAS_CHOICES = ("auto", "on", "off")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.

    ``snapshot_times`` empty means eight equispaced times over the span the
    run actually covers (the run may stop early at a blow-up).
    """

    n: int = 300
    beta: BetaModel = field(default_factory=lambda: BetaModel.power(2.0))
    t_end: float = 0.2
    rkf: RkfConfig = field(default_factory=RkfConfig)
    hilbert_backend: str = "spectral"
    poisson_backend: str = "spectral"
    dealias: str = "auto"
    sample_every: float = 1e-4
    blowup_grad_threshold: float = 1e6
    blowup_resolution_cells: float = 12.0
    snapshot_times: tuple[float, ...] = ()
    output_dir: str = "runs/out"
    seed_label: str = ""
    fit_onset_factor: float = 2.0
    fit_window: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ConfigError("n", f"must be an even integer >= 16, got {self.n!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError("t_end", f"must be a finite time >= 0, got {self.t_end!r}")
        if self.hilbert_backend not in HILBERT_BACKENDS:
            raise ConfigError("hilbert_backend", f"expected one of {HILBERT_BACKENDS}")
        if self.poisson_backend not in POISSON_BACKENDS:
            raise ConfigError("poisson_backend", f"expected one of {POISSON_BACKENDS}")
        if self.dealias not in DEALIAS_CHOICES:
            raise ConfigError("dealias", f"expected one of {DEALIAS_CHOICES}")
        if not self.sample_every > 0:
            raise ConfigError("sample_every", "must be positive")
        if not self.blowup_grad_threshold > 0:
            raise ConfigError("blowup_grad_threshold", "must be positive")
        if not self.blowup_resolution_cells >= 0:
            raise ConfigError("blowup_resolution_cells", "must be >= 0")
        if any(not 0 <= s <= self.t_end for s in self.snapshot_times):
            raise ConfigError("snapshot_times", f"must lie in [0, t_end={self.t_end}]")
        if not self.fit_onset_factor >= 1:
            raise ConfigError("fit.onset_factor", "must be >= 1")
        if not 0 < self.fit_window <= 1:
            raise ConfigError("fit.window", "must lie in (0, 1]")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "snapshot_times", tuple(sorted(float(s) for s in self.snapshot_times)))

    @property
    def dealias_flag(self) -> bool | None:
        return {"auto": None, "on": True, "off": False}[self.dealias]


PRESETS = {
    "case1": RunConfig(beta=BetaModel.power(2.0), t_end=0.2),
    "case2": RunConfig(beta=BetaModel.log_smooth(), t_end=0.2),
}


def preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


# -- flat key = value format ---------------------------------------------------

def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.replace(",", " ").split())


def _bool_word(text: str) -> str:
    t = text.strip().lower()
    aliases = {"true": "on", "yes": "on", "1": "on", "false": "off", "no": "off", "0": "off"}
    return aliases.get(t, t)


_TOP: dict[str, Callable[[str], Any]] = {
    "n": int,
    "beta": BetaModel.parse,
    "t_end": float,
    "hilbert_backend": str.strip,
    "poisson_backend": str.strip,
    "dealias": _bool_word,
    "sample_every": float,
    "blowup_grad_threshold": float,
    "blowup_resolution_cells": float,
    "snapshot_times": _floats,
    "output_dir": str.strip,
    "seed_label": str.strip,
    "fit.onset_factor": float,
    "fit.window": float,
}
_RKF: dict[str, Callable[[str], Any]] = {
    f.name: (int if f.name == "max_steps" else float) for f in dataclasses.fields(RkfConfig)
}
_FIELD = {"fit.onset_factor": "fit_onset_factor", "fit.window": "fit_window"}


def parse_overrides(pairs: dict[str, str]) -> tuple[dict, dict]:
    """Convert raw text values to typed top-level and ``rkf.*`` overrides."""
    top, rkf = {}, {}
    for key, raw in pairs.items():
        if key.startswith("rkf."):
            sub = key[4:]
            if sub not in _RKF:
                raise ConfigError(key, "unknown key")
            conv, dest, name = _RKF[sub], rkf, sub
        elif key in _TOP:
            conv, dest, name = _TOP[key], top, _FIELD.get(key, key)
        else:
            raise ConfigError(key, "unknown key")
        try:
            dest[name] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, f"invalid value {raw!r} ({exc})") from None
    return top, rkf


def apply_overrides(base: RunConfig, top: dict, rkf: dict) -> RunConfig:
    try:
        new_rkf = replace(base.rkf, **rkf) if rkf else base.rkf
    except ValueError as exc:
        raise ConfigError("rkf", str(exc)) from None
    return replace(base, rkf=new_rkf, **top)


def parse_text(text: str, origin: str = "<string>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}", "empty key")
        if key in pairs:
            raise ConfigError(key, "given more than once")
        pairs[key] = value
    return pairs


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Read a config file and apply it on top of ``base`` (default: case1)."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise IoError(p, "read", exc) from exc
    pairs = parse_text(text, str(p))
    base = base or PRESETS["case1"]
    if "preset" in pairs:
        base = preset(pairs.pop("preset"))
    top, rkf = parse_overrides(pairs)
    return apply_overrides(base, top, rkf)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return " ".join(repr(float(x)) for x in v)
    return str(v)


def dump_config(cfg: RunConfig) -> str:
    """Manifest text; ``load_config`` on it reproduces ``cfg`` exactly."""
    lines = ["# resolved run configuration"]
    inverse = {v: k for k, v in _FIELD.items()}
    for f in dataclasses.fields(cfg):
        if f.name == "rkf":
            continue
        lines.append(f"{inverse.get(f.name, f.name)} = {_fmt(getattr(cfg, f.name))}")
    for f in dataclasses.fields(cfg.rkf):
        lines.append(f"rkf.{f.name} = {_fmt(getattr(cfg.rkf, f.name))}")
    return "\n".join(lines) + "\n"
