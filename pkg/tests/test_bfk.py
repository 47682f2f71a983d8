import json
import math

import pytest

from bfklab import bfk


def test_report_json_schema_and_determinism():
    a = bfk.verify_interval(2.0, 1.0)
    b = bfk.verify_interval(2.0, 1.0)
    assert a.to_json() == b.to_json()
    data = json.loads(a.to_json())
    assert data["schema_version"] == bfk.SCHEMA_VERSION
    assert data["lhs"] == pytest.approx(4.0, rel=1e-6)
    assert data["rhs"] == pytest.approx(4.0, rel=1e-12)
    assert data["c"] == pytest.approx(1.0, abs=1e-10)
    assert data["pass"] is True
    assert "timings" not in data and "timings" in json.loads(a.to_json(include_timings=True))


def test_relative_error_from_logs_survives_huge_determinants():
    r = bfk.VerificationReport({"type": "x"}, 1000.0, 1500.0, 500.0, 0, 0, 0.0, 1e-10)
    assert r.det_A1 == math.inf
    assert r.relative_error == 0.0
    assert json.loads(r.to_json())["det_A1"] is None


def test_failed_sub_check_fails_report():
    r = bfk.verify_interval(1.0, 1.0)
    r.sub_checks[0].passed = False
    assert r.identity_passed and not r.passed
    assert r.failed_checks() == [r.sub_checks[0].name]


def test_discrete_report_uses_unit_constant():
    r = bfk.verify_discrete(11, 120)
    assert r.c == 1.0
    assert r.relative_error < 1e-10
    assert r.passed


def test_degenerate_disk_is_trivial():
    r = bfk.verify_disk(1.0, 1.0, degenerate=True)
    assert r.lhs == r.rhs == 1.0 and r.passed


def test_csv_row_shape():
    r = bfk.verify_cut_circle(2.0, 1.0)
    row = r.csv_row()
    assert len(row) == len(bfk.VerificationReport.CSV_HEADER)
    assert row[0] == "cut_circle" and row[7] == "true"


def test_suite_runner_preserves_order():
    out = bfk.run_suite([lambda s=s: bfk.verify_discrete(s, 40, prop41=False) for s in range(4)], workers=3)
    assert [r.geometry["seed"] for r in out] == [0, 1, 2, 3]
