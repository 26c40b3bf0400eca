"""Shared fixture loading for the test suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from archmend.kb import Snapshot, builtin_priors
from archmend.model import SystemState, load_architecture, load_implementation

FIXTURE_ROOT = Path(__file__).resolve().parent.parent / "fixtures"


def load_pair(name: str):
    d = FIXTURE_ROOT / name
    a = load_architecture((d / "architecture.json").read_text(encoding="utf-8"))
    s = load_implementation((d / "implementation.json").read_text(encoding="utf-8"))
    return a, s


def fixture_state(name: str) -> SystemState:
    a, s = load_pair(name)
    return SystemState(architecture=a, implementation=s)


@pytest.fixture
def empty_kb() -> Snapshot:
    return Snapshot((), builtin_priors())
