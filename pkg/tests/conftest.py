from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rzcod.design import DesignMatrix, SignedMatrix  # noqa: E402
from rzcod.formats import design_from_text, parse_entry, signed_from_text  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

_ACCEPTANCE: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def load_errata() -> list[dict]:
    return json.loads((GOLDEN / "errata.json").read_text())


def golden_design(name: str, corrected: bool = False) -> DesignMatrix:
    d = design_from_text((GOLDEN / name).read_text())
    if not corrected:
        return d
    grid = [list(r) for r in d.entries]
    for e in load_errata():
        if e["file"] == name:
            assert grid[e["row"]][e["col"]] == parse_entry(e["printed"])
            grid[e["row"]][e["col"]] = parse_entry(e["corrected"])
    return DesignMatrix(grid, d.k, d.scale_num)


def golden_signed(name: str, corrected: bool = False) -> SignedMatrix:
    m = signed_from_text((GOLDEN / name).read_text())
    if not corrected:
        return m
    arr = m.entries.copy()
    for e in load_errata():
        if e["file"] == name:
            assert arr[e["row"], e["col"]] == int(e["printed"])
            arr[e["row"], e["col"]] = int(e["corrected"])
    return SignedMatrix(arr, m.scale_num)


@pytest.fixture
def acceptance():
    return record_acceptance
