"""Shared fixtures: the expensive wave runs are computed once per session."""

from __future__ import annotations

import time

import pytest

from bswave.config import preset
from bswave.scenarios import run_beam_wave, run_crack_scenarios, run_rod_wave

# Filled by tests/test_acceptance.py; printed at the end of the session.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rod_run():
    cfg = preset("rod")
    cfg.snapshot_times = [1e-4, 2e-4]
    t0 = time.perf_counter()
    rec, report = run_rod_wave(cfg)
    return rec, report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def beam_run():
    rec, report = run_beam_wave(preset("beam"))
    return rec, report


@pytest.fixture(scope="session")
def crack_sweep():
    cfg = preset("crack-rod")
    t0 = time.perf_counter()
    records, beam_rec, report = run_crack_scenarios(cfg, jobs=1)
    return records, beam_rec, report, time.perf_counter() - t0
