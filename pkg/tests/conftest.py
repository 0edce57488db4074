from __future__ import annotations

from typing import List, Tuple

import pytest

from cardinal.config import config_from_dict, load_config
from cardinal.scenarios import scenario_path

# (number, title, passed, detail) rows filled in by test_acceptance
ACCEPTANCE: List[Tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")


@pytest.fixture
def scenario():
    return lambda name: load_config(scenario_path(name))


def tiny_config(**overrides):
    """Five-host ring with one topology worm seeded at host 0."""
    data = {
        "topology": {"kind": "ring", "hosts": 5, "k": 1},
        "worms": [{"antigen": "w"}],
        "initial_infections": [{"host": 0, "antigen": "w"}],
        "horizon": 10,
    }
    data.update(overrides)
    return config_from_dict(data)
