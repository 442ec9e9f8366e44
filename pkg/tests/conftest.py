from __future__ import annotations

import numpy as np
import pytest

from nonlocal_agg import PeriodicGrid

# criterion id -> list of (label, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def report(criterion: str, label: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        for label, ok, detail in ACCEPTANCE[crit]:
            tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit}: {label} {detail}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[16, 64, 256])
def grid(request):
    return PeriodicGrid(request.param)
