import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.models import BranchRecord  # noqa: E402


@pytest.fixture
def alternating_records():
    """One pc alternating T/N"""
    return [BranchRecord(0x400, i % 2 == 0) for i in range(1000)]


@pytest.fixture
def store_dir(tmp_path, monkeypatch):
    path = tmp_path / "store"
    monkeypatch.setenv("BWSET_STORE_PATH", str(path))
    return path
