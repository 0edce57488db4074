"""Bundled scenario configs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

NAMES = ("containment", "tolerance", "confusable", "memory", "randomscan")


def scenario_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown scenario {name!r}; expected one of {NAMES}")
    return Path(str(resources.files(__name__) / f"{name}.json"))
