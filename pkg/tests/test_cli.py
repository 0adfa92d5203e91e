#!/usr/bin/env python3

"""
Tests for the cli module.
"""

import argparse
import json
import math
import os

import pytest

from robin_gap import asymptotics
from robin_gap.cli import EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, parse_beta_grid, parse_range, run
from robin_gap.errors import InterlacingError
from robin_gap.parallel import parallel_map
from robin_gap.report import Report, Table


def _load(out, name):
    with open(os.path.join(out, name)) as f:
        return json.load(f)


def _rows(document, table):
    for entry in document["tables"]:
        if entry["name"] == table:
            return [dict(zip(entry["columns"], row)) for row in entry["rows"]]
    raise KeyError(table)


class TestParsers:
    def test_parse_range(self):
        assert parse_range("0..2") == [0, 1, 2]
        assert parse_range("1,4,5") == [1, 4, 5]
        assert parse_range("3, 1..2") == [1, 2, 3]

    @pytest.mark.parametrize("text", ["a..b", "", "1,,2"])
    def test_parse_range_invalid(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_range(text)

    def test_parse_beta_grid(self):
        assert parse_beta_grid("1e2:1e6:5") == pytest.approx([1e2, 1e3, 1e4, 1e5, 1e6])

    @pytest.mark.parametrize("text", ["1e2:1e6", "1e6:1e2:5", "0:10:3", "1:10:1"])
    def test_parse_beta_grid_invalid(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_beta_grid(text)


class TestExitCodes:
    def test_missing_subcommand(self):
        assert run([]) == EXIT_USAGE

    def test_bad_argument(self, tmp_path):
        assert run(["zeros", "--n", "a..b", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_malformed_config(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("{not json")

        assert run(["zeros", "--config", str(config), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_invalid_config_value(self, tmp_path):
        assert run(["dtn", "--trunc", "4", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_domain_error(self, tmp_path):
        assert run(["zeros", "--m", "0", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_coupling_overflow_is_a_usage_error(self, tmp_path):
        assert run(["robin-eig", "--n", "0", "--m", "1", "--beta", "2e12", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_invariant_failure(self, mocker, tmp_path):
        mocker.patch("robin_gap.specfun.find_zero", side_effect=InterlacingError("k' >= k"))

        assert run(["zeros", "--out", str(tmp_path)]) == EXIT_INVARIANT

    @pytest.mark.parametrize("status, code", [("PASS", EXIT_OK), ("INFO", EXIT_OK), ("FAIL", EXIT_INVARIANT)])
    def test_verify_outcome(self, mocker, tmp_path, status, code):
        report = Report(command="verify", version="v0.1.0", config={})
        report.add_table(Table("criteria", ["id", "status"], [["1", "PASS"], ["2", status]]))
        mock_run = mocker.patch("robin_gap.cli.run_verification", return_value=report)

        assert run(["verify", "--out", str(tmp_path)]) == code
        mock_run.assert_called_once()
        assert os.path.exists(tmp_path / "verify.json")


def test_print_config(capsys, tmp_path):
    out = tmp_path / "out"

    assert run(["zeros", "--print-config", "--threads", "2", "--out", str(out)]) == EXIT_OK

    config = json.loads(capsys.readouterr().out)
    assert config["threads"] == 2
    assert config["output_dir"] == str(out)
    assert not out.exists()


def test_config_file_and_flag_precedence(capsys, temp_config_file):
    assert run(["dtn", "--config", temp_config_file, "--trunc", "120", "--print-config"]) == EXIT_OK

    config = json.loads(capsys.readouterr().out)
    assert config["n_max"] == 120
    assert config["q_trunc"] == 40


def test_zeros(tmp_path):
    out = str(tmp_path)

    assert run(["zeros", "--kind", "dirichlet", "--n", "0..2", "--m", "1..3", "--out", out]) == EXIT_OK

    rows = _rows(_load(out, "zeros.json"), "zeros")
    assert len(rows) == 9
    assert rows[0]["value"] == pytest.approx(2.404826, abs=1e-6)
    with open(os.path.join(out, "zeros_zeros.csv"), "rb") as f:
        lines = f.read().split(b"\n")
    assert lines[0] == b"family,n,m,value,residual,bracket_lo,bracket_hi"
    assert len(lines) == 11
    assert os.path.exists(os.path.join(out, "zeros.timing.json"))


def test_airy_zeros(tmp_path):
    out = str(tmp_path)

    assert run(["zeros", "--kind", "airy", "--m", "1..2", "--out", out]) == EXIT_OK

    rows = _rows(_load(out, "zeros.json"), "zeros")
    assert [row["m"] for row in rows] == [1, 2]
    assert rows[0]["value"] == pytest.approx(2.338107, abs=1e-6)


def test_robin_eig(tmp_path):
    out = str(tmp_path)

    assert run(["robin-eig", "--n", "0", "--m", "1", "--beta", "1e3", "--beta", "10", "--out", out]) == EXIT_OK

    rows = _rows(_load(out, "robin-eig.json"), "robin")
    assert [row["beta"] for row in rows] == [10.0, 1e3]
    assert rows[0]["lambda"] < rows[1]["lambda"] < rows[1]["dirichlet_lambda"]


def test_dtn(tmp_path):
    out = str(tmp_path)

    assert run(["dtn", "--n", "0..3", "--trunc", "100", "--out", out]) == EXIT_OK

    document = _load(out, "dtn.json")
    modes = _rows(document, "dtn")
    assert [row["n"] for row in modes] == [0, 1, 2, 3]
    assert modes[0]["gamma_sq"] == pytest.approx(12.624, abs=1e-3)
    trends = {row["s"]: row["tail_trend"] for row in _rows(document, "boundedness")}
    assert trends[1.0] == "decreasing"
    assert trends[1.5] == "increasing"
    assert any("increasing" in flag for flag in document["flags"])


def test_gap_norms_json(capsys, tmp_path):
    args = ["gap-norms", "--p", "1", "--beta", "1e4", "--trunc", "100", "--json", "--out", str(tmp_path)]

    assert run(args) == EXIT_OK

    document = json.loads(capsys.readouterr().out)
    assert document["meta"]["command"] == "gap-norms"
    assert document["config"]["n_max"] == 100
    (row,) = _rows(document, "gap_norms")
    assert row["p"] == 1.0 and row["beta"] == 1e4
    assert row["value"] <= row["estimate"] <= row["value"] + row["tail_bound"]


def test_rates(tmp_path):
    out = str(tmp_path)

    assert run(["rates", "--p", "inf", "--beta-grid", "1e3:1e7:5", "--trunc", "100", "--out", out]) == EXIT_OK

    (fit,) = _rows(_load(out, "rates.json"), "rates")
    assert fit["norm"] == "operator"
    assert fit["exponent"] == pytest.approx(-1.0, abs=0.02)
    assert os.path.exists(os.path.join(out, "rates_rate_points.csv"))


def test_expansion(tmp_path):
    out = str(tmp_path)

    assert run(["expansion", "--n", "0", "--m", "1", "--beta", "1e3", "--levels", "4", "--out", out]) == EXIT_OK

    document = _load(out, "expansion.json")
    (coefficients,) = _rows(document, "coefficients")
    assert coefficients["c1"] == pytest.approx(-11.566372, rel=1e-6)
    assert len(_rows(document, "stability")) == 4
    (matrix,) = _rows(document, "matrix")
    assert matrix["m_entry"] == pytest.approx(11.566372, rel=1e-6)
    (drift,) = _rows(document, "drift")
    assert 0.0 < drift["drift"] < 1e-4
    assert not math.isnan(drift["drift"])


def test_expansion_honours_thread_flag(mocker, tmp_path):
    spy = mocker.spy(asymptotics, "extract_coefficients")
    args = ["expansion", "--n", "0", "--m", "1", "--beta", "1e3", "--levels", "3", "--threads", "3"]

    assert run(args + ["--out", str(tmp_path)]) == EXIT_OK

    mapper = spy.call_args.kwargs["mapper"]
    assert mapper.func is parallel_map
    assert mapper.keywords == {"threads": 3}
