from __future__ import annotations

import subprocess
import sys

import pytest

from nonlocal_agg import StopReason
from nonlocal_agg import formats
from nonlocal_agg.cli import exit_code, main


def write_cfg(tmp_path, body=""):
    p = tmp_path / "run.cfg"
    p.write_text("preset = case2\nn = 64\nt_end = 0.005\nsample_every = 0.001\n"
                 "blowup_resolution_cells = 0\n" + body)
    return p


def test_exit_code_mapping():
    assert exit_code(StopReason.COMPLETED) == 0
    for r in (StopReason.BLOWUP_THRESHOLD, StopReason.DT_UNDERFLOW, StopReason.NON_FINITE):
        assert exit_code(r) == 2
    assert exit_code(StopReason.MAX_STEPS) == 1


def test_run_completed(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "--config", str(write_cfg(tmp_path)), "--output-dir", str(out)]) == 0
    assert "stop=completed" in capsys.readouterr().out
    assert (out / "series.csv").exists() and (out / "manifest.cfg").exists()


def test_flags_override_file(tmp_path):
    out = tmp_path / "o"
    main(["run", "--config", str(write_cfg(tmp_path)), "--n", "32", "--t-end", "0.002",
          "--output-dir", str(out)])
    manifest = (out / "manifest.cfg").read_text()
    assert "n = 32\n" in manifest and "t_end = 0.002\n" in manifest


def test_preset_then_file(tmp_path):
    p = tmp_path / "f.cfg"
    p.write_text("n = 32\nt_end = 0.001\nblowup_resolution_cells = 0\n")
    out = tmp_path / "o"
    assert main(["run", "--preset", "case2", "--config", str(p), "--output-dir", str(out)]) == 0
    assert "beta = log\n" in (out / "manifest.cfg").read_text()


def test_max_steps_is_error(tmp_path):
    cfg = write_cfg(tmp_path, "rkf.max_steps = 2\n")
    assert main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1


def test_blowup_exit_code(tmp_path, capsys):
    assert main(["run", "--preset", "case1", "--output-dir", str(tmp_path / "c1")]) == 2
    assert "stop=blowup_threshold" in capsys.readouterr().out


def test_config_error(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("n = odd\n")
    assert main(["run", "--config", str(p)]) == 1
    assert "n:" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_run_needs_a_source():
    with pytest.raises(SystemExit):
        main(["run"])


def test_fit_command(tmp_path, capsys):
    t = [0.45 * i / 49 for i in range(50)]
    from nonlocal_agg.diagnostics import TimeSeriesRecord
    recs = [TimeSeriesRecord(ti, 0, 0, 0, 2 / (0.5 - ti) ** 1.5, 0, 0, 0, 0) for ti in t]
    path = formats.write_series(tmp_path / "s.csv", recs)
    assert main(["fit", "--series", str(path)]) == 0
    out = capsys.readouterr().out
    fields = dict(line.split(": ") for line in out.strip().splitlines())
    assert fields["status"] == "ok"
    assert float(fields["T"]) == pytest.approx(0.5, abs=1e-6)
    assert float(fields["a"]) == pytest.approx(1.5, abs=1e-6)


def test_fit_degenerate(tmp_path, capsys):
    from nonlocal_agg.diagnostics import TimeSeriesRecord
    recs = [TimeSeriesRecord(0.01 * i, 0, 0, 0, 1.0, 0, 0, 0, 0) for i in range(20)]
    path = formats.write_series(tmp_path / "s.csv", recs)
    assert main(["fit", "--series", str(path)]) == 1
    assert "degenerate" in capsys.readouterr().out


def test_check_invariants(capsys):
    assert main(["check-invariants", "--count", "10"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS calderon" in out


def test_sweep(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    code = main(["sweep", "--config", str(cfg), "--sizes", "32", "64", "--workers", "2",
                 "--output-dir", str(tmp_path / "sw")])
    assert code == 0
    assert (tmp_path / "sw" / "n32" / "series.csv").exists()
    assert (tmp_path / "sw" / "n64" / "series.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nonlocal_agg", "run", "--config",
                           str(write_cfg(tmp_path)), "--output-dir", str(tmp_path / "m")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
