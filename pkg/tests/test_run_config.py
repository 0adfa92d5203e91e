#!/usr/bin/env python3

"""
Tests for the run_config module.
"""

import json
import os
import tempfile
from unittest.mock import patch

import pytest

from robin_gap.errors import ConfigError
from robin_gap.run_config import DEFAULT_TOLERANCES, RunConfig, default_beta_grid


def test_default_values(monkeypatch):
    monkeypatch.delenv("ROBIN_GAP_THREADS", raising=False)
    config = RunConfig()

    assert config.n_max == 2000
    assert config.m_trunc == 64
    assert config.q_trunc == 64
    assert config.beta_grid == default_beta_grid()
    assert config.beta_grid[0] == 1e2 and config.beta_grid[-1] == pytest.approx(1e6)
    assert len(config.beta_grid) == 9
    assert config.tolerances == DEFAULT_TOLERANCES
    assert config.output_dir == "out"
    assert config.threads == 1


def test_default_tolerances_are_not_shared():
    config = RunConfig()
    config.tolerances["c2_rel"] = 1.0

    assert DEFAULT_TOLERANCES["c2_rel"] == 1e-3
    assert RunConfig().tolerance("c2_rel") == 1e-3


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("ROBIN_GAP_THREADS", "4")

    assert RunConfig().threads == 4


@pytest.mark.parametrize("raw", ["many", "0", "-2"])
def test_invalid_threads_environment_falls_back(monkeypatch, raw):
    monkeypatch.setenv("ROBIN_GAP_THREADS", raw)

    assert RunConfig().threads == 1


def test_from_dict_partial():
    config = RunConfig.from_dict({"n_max": 500, "tolerances": {"c1_rel": 1e-7}})

    assert config.n_max == 500
    assert config.q_trunc == 64
    assert config.tolerance("c1_rel") == 1e-7
    # Unspecified tolerances keep their defaults
    assert config.tolerance("c2_rel") == 1e-3


def test_from_dict_casts_values():
    config = RunConfig.from_dict({"n_max": "300", "beta_grid": [1, 10, 100, 1000], "threads": 2.0})

    assert config.n_max == 300
    assert config.beta_grid == [1.0, 10.0, 100.0, 1000.0]
    assert all(isinstance(beta, float) for beta in config.beta_grid)
    assert config.threads == 2


def test_from_dict_extra_fields():
    config = RunConfig.from_dict({"n_max": 100, "extra_field": "should be ignored"})

    assert config.n_max == 100
    assert not hasattr(config, "extra_field")


@pytest.mark.parametrize(
    "data",
    [
        {"n_max": 8},
        {"m_trunc": 4},
        {"q_trunc": 16},
        {"threads": 0},
        {"beta_grid": [1.0, 10.0, 100.0]},
        {"beta_grid": [1.0, 10.0, 10.0, 100.0]},
        {"beta_grid": [-1.0, 10.0, 100.0, 1000.0]},
        {"tolerances": {"c1_rel": 0.0}},
        {"n_max": "lots"},
    ],
)
def test_from_dict_invalid(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_to_dict_round_trip():
    config = RunConfig(n_max=400, beta_grid=[1.0, 10.0, 100.0, 1000.0], threads=3)

    assert RunConfig.from_dict(config.to_dict()) == config


def test_from_file_existing(temp_config_file):
    config = RunConfig.from_file(temp_config_file)

    assert config.n_max == 300
    assert config.q_trunc == 40
    assert config.tolerance("c2_rel") == 5e-4


@patch("robin_gap.run_config.logging")
def test_from_file_nonexistent(mock_logging):
    config = RunConfig.from_file("/nonexistent/file.json")

    # Should return default values
    assert config.n_max == 2000
    assert config.tolerances == DEFAULT_TOLERANCES
    mock_logging.warning.assert_called_once()


@pytest.mark.parametrize("content", ["invalid json content", "[1, 2, 3]"])
def test_from_file_invalid(content):
    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as f:
        f.write(content)
        temp_file = f.name

    try:
        with pytest.raises(ConfigError):
            RunConfig.from_file(temp_file)
    finally:
        os.unlink(temp_file)


def test_to_file():
    config = RunConfig(n_max=250, output_dir="results", threads=2)

    with tempfile.TemporaryDirectory() as temp_dir:
        temp_file = os.path.join(temp_dir, "test", "config.json")

        config.to_file(temp_file)

        # Verify file was created and the temporary file renamed away
        assert os.path.exists(temp_file)
        assert not os.path.exists(temp_file + ".tmp")

        with open(temp_file, "rb") as f:
            raw = f.read()

        assert raw.endswith(b"}\n")
        assert b"\r\n" not in raw
        data = json.loads(raw)
        assert data["n_max"] == 250
        assert data["output_dir"] == "results"
        assert list(data) == sorted(data)


def test_to_file_uses_atomic_writer(mocker):
    mock_write = mocker.patch("robin_gap.run_config.write_text")
    config = RunConfig(threads=1)

    config.to_file("out/config.json")

    mock_write.assert_called_once_with("out/config.json", config.to_json())


def test_to_json_is_stable():
    assert RunConfig(threads=1).to_json() == RunConfig(threads=1).to_json()


def test_merged_applies_overrides():
    config = RunConfig(n_max=300, threads=1)

    merged = config.merged({"n_max": 600, "q_trunc": None, "output_dir": "elsewhere"})

    assert merged.n_max == 600
    assert merged.q_trunc == 64
    assert merged.output_dir == "elsewhere"
    # The original is untouched
    assert config.n_max == 300


def test_merged_validates():
    with pytest.raises(ConfigError):
        RunConfig(threads=1).merged({"n_max": 1})


def test_unknown_tolerance_name():
    with pytest.raises(KeyError):
        RunConfig(threads=1).tolerance("does_not_exist")
