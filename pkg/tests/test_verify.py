#!/usr/bin/env python3

"""
Tests for the verify module.
"""

import math

import pytest

from robin_gap import asymptotics, verify
from robin_gap.errors import BracketError, ConsistencyError
from robin_gap.report import Report, Table
from robin_gap.verify import (
    Criterion,
    _run_check,
    check_diagnostics,
    check_dtn_bounds,
    check_dtn_growth,
    check_expansion_remainder,
    check_matrix_identity,
    check_operator_norm_rate,
    check_trace_norm,
    run_verification,
    verification_passed,
)


def _statuses(criteria):
    return {criterion.id: criterion.status for criterion in criteria}


class TestCriterion:
    def test_status(self):
        assert Criterion("1", "a", True, 0.0, "t").status == "PASS"
        assert Criterion("1", "a", False, 0.0, "t").status == "FAIL"
        assert Criterion("1", "a", False, 0.0, "t", informational=True).status == "INFO"

    def test_to_row(self):
        row = Criterion("7", "rate", True, -1.0, "-1 +- 0.02", detail="x").to_row()

        assert row == {
            "id": "7",
            "criterion": "rate",
            "status": "PASS",
            "measured": -1.0,
            "threshold": "-1 +- 0.02",
            "detail": "x",
        }


def test_run_check_turns_errors_into_failures(run_config):
    def broken(config):
        raise BracketError("no sign change on [1, 2]")

    (criteria, tables), elapsed = _run_check("broken", broken, run_config)

    assert tables == []
    assert criteria[0].status == "FAIL"
    assert math.isnan(criteria[0].measured)
    assert "BracketError" in criteria[0].detail
    assert elapsed >= 0.0


class TestRunVerification:
    @pytest.fixture
    def fake_checks(self, monkeypatch):
        def passing(config):
            return [Criterion("A", "passing", True, 1.0, "t")], [Table("numbers", ["x"], [[1.0]])]

        def flagged(config):
            table = Table("coefficients", ["n", "m", "flag"], [[0, 1, ""], [2, 3, "CLOSED-FORM-DISCREPANCY"]])
            return [Criterion("B", "flagged", True, 0.5, "t", informational=True)], [table]

        monkeypatch.setattr(verify, "CHECKS", [("passing", passing), ("flagged", flagged)])
        monkeypatch.setattr(verify, "check_determinism", lambda config, tables: Criterion("12", "d", True, 1.0, "t"))

    def test_report_layout(self, fake_checks, run_config, serial_mapper):
        report = run_verification(run_config, "v0.1.0", mapper=serial_mapper)

        serial_mapper.assert_called_once()
        assert serial_mapper.call_args.kwargs["threads"] == 1
        assert [table.name for table in report.tables] == ["criteria", "numbers", "coefficients"]
        assert report.table("criteria").column("id") == ["A", "B", "12"]
        assert report.flags == ["CLOSED-FORM-DISCREPANCY (2, 3)"]
        assert set(report.timing) == {"passing", "flagged", "determinism"}
        assert verification_passed(report)

    def test_failure_is_flagged(self, fake_checks, monkeypatch, run_config, serial_mapper):
        monkeypatch.setattr(
            verify, "check_determinism", lambda config, tables: Criterion("12", "d", False, 0.0, "identical")
        )

        report = run_verification(run_config, "v0.1.0", mapper=serial_mapper)

        assert report.flags[-1] == "FAILED: 12"
        assert not verification_passed(report)


def test_verification_passed_ignores_info():
    report = Report(command="verify", version="v0.1.0", config={})
    report.add_table(Table("criteria", ["id", "status"], [["1", "PASS"], ["D1", "INFO"]]))

    assert verification_passed(report)


class TestChecks:
    def test_dtn_growth(self, run_config):
        criteria, _ = check_dtn_growth(run_config)

        assert _statuses(criteria) == {"3": "PASS"}

    def test_dtn_bounds(self, run_config):
        criteria, tables = check_dtn_bounds(run_config)

        assert _statuses(criteria) == {"2": "PASS", "2b": "PASS", "2c": "INFO"}
        assert tables[0].name == "dtn"

    def test_operator_norm_rate(self, run_config):
        criteria, tables = check_operator_norm_rate(run_config)

        assert _statuses(criteria) == {"7": "PASS", "7b": "PASS"}
        assert all(tables[0].column("certified"))
        assert set(tables[0].column("argmax")) == {0}

    def test_trace_norm(self, run_config):
        criteria, _ = check_trace_norm(run_config)

        assert _statuses(criteria) == {"8": "PASS", "8b": "PASS", "8c": "PASS", "8d": "PASS"}

    def test_expansion_remainder(self, run_config):
        criteria, tables = check_expansion_remainder(run_config)

        assert _statuses(criteria) == {"9": "PASS"}
        assert len(tables[0].rows) > 0

    def test_matrix_identity(self, run_config):
        criteria, _ = check_matrix_identity(run_config)

        assert _statuses(criteria) == {"11": "PASS"}

    def test_matrix_identity_fails_on_perturbed_extension(self, mocker, run_config):
        slope = asymptotics.harmonic_extension_slope
        mocker.patch.object(asymptotics, "harmonic_extension_slope", side_effect=lambda n: slope(n) * (1 + 1e-8))

        with pytest.raises(ConsistencyError):
            check_matrix_identity(run_config)

    def test_projection_drift_uses_configured_threads(self, mocker, run_config):
        run_config.threads = 3
        mock_map = mocker.patch(
            "robin_gap.verify.parallel_map", side_effect=lambda func, items, threads=None: [func(i) for i in items]
        )
        mocker.patch.object(asymptotics, "projection_drift", side_effect=lambda n, m, beta: 4.0 / beta**2)

        criteria, _ = verify.check_projection_drift(run_config)

        assert _statuses(criteria) == {"10": "PASS"}
        assert {call.kwargs["threads"] for call in mock_map.call_args_list} == {3}

    def test_diagnostics_are_informational(self, run_config):
        criteria, tables = check_diagnostics(run_config)

        assert {criterion.status for criterion in criteria} == {"INFO"}
        assert tables[0].column("n") == [10, 100, 1000]


@pytest.mark.slow
class TestHeavyChecks:
    def test_special_functions(self, run_config):
        criteria, _ = verify.check_special_functions(run_config)

        assert _statuses(criteria) == {"1": "PASS", "1b": "PASS"}

    def test_robin_bracketing(self, run_config):
        criteria, _ = verify.check_robin_bracketing(run_config)

        assert _statuses(criteria) == {"4": "PASS"}

    def test_coefficients(self, run_config, serial_mapper):
        criteria, tables = verify.check_coefficients(run_config, mapper=serial_mapper)

        statuses = _statuses(criteria)
        assert statuses["5a"] == "PASS" and statuses["5"] == "PASS"
        assert statuses["6"] == "PASS" and statuses["6b"] == "INFO"
        assert len(tables[0].rows) == 12

    def test_projection_drift(self, run_config, serial_mapper):
        criteria, _ = verify.check_projection_drift(run_config, mapper=serial_mapper)

        assert _statuses(criteria) == {"10": "PASS"}

    def test_determinism(self, run_config):
        tables = verify.check_coefficients(run_config)[1] + check_operator_norm_rate(run_config)[1]

        assert verify.check_determinism(run_config, tables).status == "PASS"
