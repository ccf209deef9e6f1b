"""
Shared test setup: import interface_fno from src/ without installation and
keep worker-count resolution independent of the caller's shell.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest


ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from interface_fno.constants import THREADS_ENV_VAR  # noqa: E402


@pytest.fixture(autouse=True)
def _no_thread_override(monkeypatch) -> None:
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
