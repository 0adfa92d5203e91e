import json
import os
import tempfile
from unittest.mock import Mock

import pytest

from robin_gap.gap_model import build_model
from robin_gap.run_config import RunConfig


@pytest.fixture(scope="session")
def small_model():
    """Diagonal model truncated at a modest order, shared across the session."""
    return build_model(200)


@pytest.fixture(scope="session")
def full_model():
    """Diagonal model at the default truncation."""
    return build_model()


@pytest.fixture
def serial_mapper():
    """Drop-in replacement for parallel_map that runs in the calling thread."""

    def mapper(func, items, threads=None):
        return [func(item) for item in items]

    return Mock(side_effect=mapper)


@pytest.fixture
def run_config(tmp_path):
    """Small configuration writing into a temporary directory."""
    return RunConfig(n_max=200, output_dir=str(tmp_path / "out"), threads=1)


@pytest.fixture
def temp_config_file():
    """Create a temporary config file for testing."""
    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as f:
        json.dump({"n_max": 300, "q_trunc": 40, "tolerances": {"c2_rel": 5e-4}, "unknown": 1}, f)
        temp_file = f.name

    yield temp_file

    # Cleanup
    try:
        os.unlink(temp_file)
    except OSError:
        pass
