"""Shared fixtures: virtual clock, fixture-corpus helpers, registries."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from idsweep.geo import default_registry
from idsweep.harvest import Clock


class VirtualClock(Clock):
    """Monotonic fake; sleeping advances time instantly and is recorded."""

    def __init__(self):
        self.t = 0.0
        self.sleeps: list[float] = []

    def now(self) -> float:
        return self.t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.sleeps.append(seconds)
            self.t += seconds


@pytest.fixture
def virtual_clock():
    return VirtualClock()


@pytest.fixture(scope="session")
def registry():
    return default_registry()


def write_index(
    root: Path,
    queries: dict[str, list[dict]],
    objects: dict[str, dict],
) -> Path:
    """Materialize a corpus index JSON under root; returns its path."""
    index = root / "index.json"
    index.write_text(json.dumps({"queries": queries, "objects": objects}, ensure_ascii=False), "utf-8")
    return index


def write_doc(root: Path, name: str, text: str) -> str:
    """Write a document file under root/docs; returns the index-relative path."""
    docs = root / "docs"
    docs.mkdir(exist_ok=True)
    (docs / name).write_text(text, encoding="utf-8")
    return f"docs/{name}"
