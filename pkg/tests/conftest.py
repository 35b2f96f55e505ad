import json
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from pegrisk.series import BivariateSeries, TimeSeries

DATA = Path(__file__).parent / "data"

_criteria: list[tuple[str, bool, str]] = []


@lru_cache(maxsize=1)
def load_oracles() -> dict:
    return json.loads((DATA / "oracles.json").read_text())


def dates(n, start="2024-01-01"):
    return np.datetime64(start, "D") + np.arange(n)


def series(values, start="2024-01-01"):
    values = np.asarray(values, dtype=float)
    return TimeSeries(dates(values.size, start), values)


def pair(peg, green, start="2024-01-01"):
    peg = np.asarray(peg, dtype=float)
    return BivariateSeries(dates(peg.size, start), peg, np.asarray(green, dtype=float))


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(label, passed, detail)``."""

    def record(label, passed, detail=""):
        _criteria.append((label, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
