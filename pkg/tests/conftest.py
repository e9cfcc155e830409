"""Pytest fixtures for rcslab tests."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from rcslab.circuits.architecture import build_architecture
from rcslab.core.config import ExperimentConfig


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    """A fixed-seed generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def brickwork4():
    """Four-qubit brickwork of depth 3."""
    return build_architecture(4, 3, "brickwork1d")


@pytest.fixture
def small_config(temp_dir, monkeypatch):
    """A tiny single-worker scan configuration writing into temp_dir."""
    monkeypatch.delenv("RCSLAB_WORKERS", raising=False)

    def make(**overrides):
        raw = {
            "n": [2],
            "d": [1],
            "samples": 20,
            "block_size": 7,
            "workers": 1,
            "executor": "thread",
            "seed": 99,
            "out_dir": str(temp_dir / "out"),
        }
        raw.update(overrides)
        return ExperimentConfig.from_mapping(raw)

    return make
