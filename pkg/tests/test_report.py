#!/usr/bin/env python3

"""
Tests for the report module.
"""

import json
import math
import os

import numpy as np
import pytest

from robin_gap.report import Report, Table, write_text


@pytest.fixture
def report():
    report = Report(command="zeros", version="v0.1.0", config={"n_max": 200, "beta_grid": [1.0, 10.0]})
    table = report.add_table(Table("zeros", ["family", "n", "value", "converged"]))
    table.add_row("dirichlet", 0, 2.5, True)
    table.add_row("neumann", np.int64(1), np.float64(0.1), np.bool_(False))
    report.flags.append("CLOSED-FORM-DISCREPANCY (0, 1)")
    report.timing["zeros"] = 0.12345
    return report


class TestTable:
    def test_csv_format(self, report):
        csv = report.table("zeros").to_csv()

        assert csv == (
            "family,n,value,converged\n"
            "dirichlet,0,2.5,true\n"
            "neumann,1,0.10000000000000001,false\n"
        )

    def test_add_row_length_mismatch(self):
        table = Table("t", ["a", "b"])

        with pytest.raises(ValueError):
            table.add_row(1.0)

    def test_from_records(self):
        table = Table.from_records("t", [{"x": 1, "y": 2.0}, {"x": 3, "y": 4.0}])

        assert table.columns == ["x", "y"]
        assert table.column("y") == [2.0, 4.0]

    def test_from_records_empty(self):
        table = Table.from_records("t", [])

        assert table.columns == [] and table.rows == []
        assert table.to_csv() == "\n"

    def test_to_dict_converts_numpy_scalars(self, report):
        rows = report.table("zeros").to_dict()["rows"]

        assert rows[1] == ["neumann", 1, 0.1, False]
        assert type(rows[1][1]) is int and type(rows[1][3]) is bool


class TestReport:
    def test_missing_table(self, report):
        with pytest.raises(KeyError):
            report.table("absent")

    def test_json_layout(self, report):
        data = json.loads(report.to_json())

        assert data["meta"] == {"tool": "robin-gap", "version": "v0.1.0", "command": "zeros"}
        assert data["config"]["n_max"] == 200
        assert data["flags"] == ["CLOSED-FORM-DISCREPANCY (0, 1)"]
        assert data["tables"][0]["name"] == "zeros"
        # Timings never enter the main document
        assert "timing" not in data

    def test_json_with_timing(self, report):
        data = json.loads(report.to_json(include_timing=True))

        assert data["timing"] == {"zeros": 0.123}

    def test_non_finite_values_become_strings(self):
        report = Report(command="gap-norms", version="v0.1.0", config={})
        report.add_table(Table("norms", ["p", "tail_bound"], [[0.5, math.inf], [1.0, float("nan")]]))

        rows = json.loads(report.to_json())["tables"][0]["rows"]

        assert rows == [[0.5, "inf"], [1.0, "nan"]]

    def test_json_is_deterministic(self, report):
        first = report.to_json()
        report.timing["zeros"] = 99.0

        assert report.to_json() == first

    def test_write(self, report, tmp_path):
        paths = report.write(str(tmp_path / "out"))

        names = sorted(os.path.basename(path) for path in paths)
        assert names == ["zeros.json", "zeros.timing.json", "zeros_zeros.csv"]
        with open(tmp_path / "out" / "zeros.timing.json") as f:
            assert json.load(f) == {"timing": {"zeros": 0.123}}
        with open(tmp_path / "out" / "zeros.json") as f:
            assert json.load(f)["meta"]["command"] == "zeros"
        assert not any(name.endswith(".tmp") for name in os.listdir(tmp_path / "out"))

    def test_write_without_timing(self, tmp_path):
        report = Report(command="dtn", version="v0.1.0", config={})

        paths = report.write(str(tmp_path))

        assert [os.path.basename(path) for path in paths] == ["dtn.json"]


def test_write_text_uses_lf(tmp_path):
    path = tmp_path / "nested" / "file.csv"

    write_text(str(path), "a,b\n1,2\n")

    assert path.read_bytes() == b"a,b\n1,2\n"
