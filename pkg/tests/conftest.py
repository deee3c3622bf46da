"""Shared fixtures and reporting hooks for the defectsim test suite."""

from __future__ import annotations

import re

import numpy as np
import pytest

import defectsim as ds

# One human-readable line per acceptance criterion, echoed at the end of the
# pytest run (stdout capture would otherwise swallow them for passing tests).
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture()
def acceptance_log():
    """Callable that registers one summary line for the final report."""

    def _log(line: str) -> None:
        ACCEPTANCE_LINES.append(line)

    return _log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return

    def criterion_number(line: str) -> int:
        match = re.search(r"criterion (\d+)", line)
        return int(match.group(1)) if match else 99

    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=criterion_number):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_dataset() -> ds.Dataset:
    """A 60-module synthetic dataset shared by fast simulator tests."""
    return ds.generate_synthetic(60, 0.3, n_features=4, separation=1.5, seed=11)


@pytest.fixture(scope="session")
def tiny_dataset() -> ds.Dataset:
    """A 30-module synthetic dataset for the cheapest end-to-end tests."""
    return ds.generate_synthetic(30, 0.35, n_features=3, separation=2.0, seed=29)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
