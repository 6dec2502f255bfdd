import json
import math

import numpy as np

from tools.cli.core.experiments import Check, ExperimentRecord, Summary
from tools.cli.core.report import (
    SUMMARY_COLUMNS,
    format_number,
    summary_rows,
    to_jsonable,
    write_patch_columns,
    write_report,
    write_summary,
)


def _record(name="degree", passed=True, summary=None):
    record = ExperimentRecord(name, "degree", {"pair": ("L0", "L1")})
    record.checks.append(Check("degree_integrality", 0.0, 1e-6, passed))
    record.summary = summary
    return record


def test_format_number():
    assert format_number(1) == "1"
    assert format_number(np.int64(-3)) == "-3"
    assert format_number(2.0) == "2"
    assert format_number(0.1) == "0.1"
    assert format_number(1e-12) == "1e-12"
    assert format_number(math.pi) == "3.14159265359"
    assert format_number(math.nan) == "nan"


def test_to_jsonable():
    value = {
        "z": 1 + 2j,
        "arr": np.array([0.5, 1.5]),
        "bad": math.inf,
        "n": np.float64(0.25),
        "pair": (1, None),
        "flag": True,
    }
    assert to_jsonable(value) == {
        "z": [1.0, 2.0],
        "arr": [0.5, 1.5],
        "bad": None,
        "n": 0.25,
        "pair": [1, None],
        "flag": True,
    }


def test_summary_rows():
    rows = summary_rows(
        [
            _record(summary=Summary("degree", 1, 2.5e-15, 1e-6)),
            _record("broken", passed=False),
        ]
    )
    assert rows[0] == ["degree", "degree", "1", "2.5e-15", "1e-06", "pass"]
    assert rows[1] == ["broken", "", "", "", "", "fail"]


def test_record_without_checks_fails():
    assert ExperimentRecord("x", "grade", {}).passed is False


def test_write_summary(tmp_path):
    path = write_summary(tmp_path, [_record(summary=Summary("degree", 1, 0.0, 1e-6))])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    assert lines[1] == "degree,degree,1,0,1e-06,pass"


def test_write_report_is_json(tmp_path):
    path = write_report(tmp_path, to_jsonable({"values": [1j]}))
    assert json.loads(path.read_text()) == {"values": [[0.0, 1.0]]}


def test_write_patch_columns(tmp_path):
    path = write_patch_columns(tmp_path, "annulus", {"a": [0.0, 0.5], "region": ["x", "y"]}, index=2)
    assert path == tmp_path / "patches" / "annulus_2.csv"
    assert path.read_text() == "a,region\n0,x\n0.5,y\n"
