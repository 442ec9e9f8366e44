"""Command-line entry point: ``nonlocal-agg run|fit|check-invariants|sweep``.

Exit codes: 0 run completed, 2 run stopped at a detected blow-up, 1 error
(including exhausting ``rkf.max_steps``).
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import formats
from .config import PRESETS, RunConfig, apply_overrides, load_config, preset
from .errors import AggregationError, FitDegenerate
from .rkf import StopReason
from .scenarios import fit_records, format_fit, run_scenario

log = logging.getLogger("nonlocal_agg")

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2


def exit_code(reason: StopReason) -> int:
    if reason is StopReason.COMPLETED:
        return EXIT_OK
    return EXIT_BLOWUP if reason.is_blowup else EXIT_ERROR


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="base preset (applied before --config)")
    p.add_argument("--n", type=int, help="grid size")
    p.add_argument("--t-end", type=float, help="final time")
    p.add_argument("--output-dir", help="directory for series, snapshots and manifest")


def resolve_config(args) -> RunConfig:
    """Preset, then config file, then command-line flags."""
    if args.config is None and args.preset is None:
        raise SystemExit("run: give --config, --preset, or both")
    base = preset(args.preset) if args.preset else None
    cfg = load_config(args.config, base=base) if args.config else base
    flags = {k: v for k, v in (("n", args.n), ("t_end", args.t_end),
                               ("output_dir", args.output_dir)) if v is not None}
    return apply_overrides(cfg, flags, {})


def summarize(cfg: RunConfig, result) -> str:
    last = result.records[-1]
    lines = [
        f"n={cfg.n} beta={cfg.beta} stop={result.reason.value} t={result.t_stop:.6g}",
        f"  steps accepted={result.accepted} rejected={result.rejected}",
        f"  final linf={last.linf:.6g} min={last.min_val:.3e} grad_linf={last.grad_linf:.6g}"
        f" mass={last.mass:.15g}",
    ]
    if result.fit is not None:
        f = result.fit
        lines.append(f"  fit C={f.C:.6g} T={f.T:.6g} a={f.a:.6g} (rms log misfit {f.residual:.2e})")
    elif result.fit_error:
        lines.append(f"  fit degenerate: {result.fit_error}")
    if result.series_path is not None:
        lines.append(f"  outputs in {Path(cfg.output_dir)}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    result = run_scenario(cfg)
    print(summarize(cfg, result))
    return exit_code(result.reason)


def cmd_fit(args) -> int:
    records = formats.read_series(args.series)
    try:
        fit = fit_records(records, window=args.window, onset_factor=args.onset_factor)
    except FitDegenerate as exc:
        print(format_fit(None, str(exc)), end="")
        return EXIT_ERROR
    print(format_fit(fit), end="")
    return EXIT_OK


def cmd_check(args) -> int:
    from .invariants import run_all

    results = run_all(n=args.n, seed=args.seed, count=args.count)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR


def _sweep_one(cfg: RunConfig) -> tuple[int, str, int]:
    result = run_scenario(cfg)
    return cfg.n, summarize(cfg, result), exit_code(result.reason)


def cmd_sweep(args) -> int:
    base = resolve_config(args)
    root = Path(args.output_dir or base.output_dir)
    cfgs = [replace(base, n=n, output_dir=str(root / f"n{n}")) for n in args.sizes]
    codes = []
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for n, text, code in pool.map(_sweep_one, cfgs):
            print(text)
            codes.append(code)
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return EXIT_BLOWUP if EXIT_BLOWUP in codes else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-agg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one scenario")
    _add_run_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="fit C/(T-t)^a to the gradient column of a series file")
    p.add_argument("--series", type=Path, required=True)
    p.add_argument("--window", type=float, default=1.0, help="trailing fraction after onset")
    p.add_argument("--onset-factor", type=float, default=2.0,
                   help="fit starts once grad_linf reaches this multiple of its first value")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check-invariants", help="run the operator property suite")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="run one scenario at several grid sizes in parallel")
    _add_run_args(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[300, 600, 1000])
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (AggregationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
