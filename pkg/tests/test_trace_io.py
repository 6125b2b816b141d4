#!/usr/bin/env python3
"""
Tests for trace CSV loading and the JSON-lines report writer
"""

import json
import sys
from fractions import Fraction
from io import StringIO
from pathlib import Path

import pytest

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.errors import TraceValidationError
from src.core.traces import trace_from_function
from src.utils.reporting import Report, dumps, read_reports, save_reports, write_reports
from src.utils.trace_io import read_trace_csv, write_trace_csv


def write(tmp_path, text, name="trace.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_read_dense_trace(tmp_path):
    trace = read_trace_csv(write(tmp_path, "n,cost\n2,4\n3,9\n4,16\n"))
    assert trace.points == ((2, 4), (3, 9), (4, 16))
    assert not trace.sampled
    assert trace.label == "trace"


def test_read_sampled_trace_with_spaces(tmp_path):
    trace = read_trace_csv(write(tmp_path, "n, cost\n4, 16\n8, 64\n16, 256\n\n"))
    assert trace.sampled
    assert trace.cost(8) == 64


def test_round_trip(tmp_path):
    trace = trace_from_function(lambda n: 3 * n + 1, range(2, 20), label="affine")
    loaded = read_trace_csv(write_trace_csv(trace, tmp_path / "affine.csv"))
    assert loaded.points == trace.points


@pytest.mark.parametrize("text,line,n", [
    ("n,cost\n2,4\n3,9\n4,3\n", 4, 4),
    ("n,cost\n2,4\n2,5\n", 3, 2),
    ("n,cost\n2,0\n", 2, 2),
])
def test_validation_errors_cite_lines(tmp_path, text, line, n):
    with pytest.raises(TraceValidationError) as err:
        read_trace_csv(write(tmp_path, text))
    assert err.value.line == line
    assert err.value.n == n
    assert str(err.value).startswith(f"line {line}:")


def test_missing_column_is_line_one(tmp_path):
    with pytest.raises(TraceValidationError) as err:
        read_trace_csv(write(tmp_path, "n,ops\n2,4\n"))
    assert err.value.line == 1
    assert "cost" in str(err.value)


def test_non_integer_cost(tmp_path):
    with pytest.raises(TraceValidationError) as err:
        read_trace_csv(write(tmp_path, "n,cost\n2,4\n3,many\n"))
    assert err.value.line == 3


def test_empty_and_missing_files(tmp_path):
    with pytest.raises(TraceValidationError):
        read_trace_csv(write(tmp_path, "n,cost\n"))
    with pytest.raises(TraceValidationError):
        read_trace_csv(tmp_path / "absent.csv")


def test_report_lines_are_canonical():
    report = Report("classify", {"range": "4..64", "n1": 4}, Fraction(3, 2), {"grid": ("a", "b")})
    assert report.line() == (
        '{"inputs":{"n1":4,"range":"4..64"},"op":"classify","result":"3/2","witness":{"grid":["a","b"]}}\n'
    )
    assert dumps({"blob": b"\x01\xff"}) == '{"blob":"01ff"}'


def test_reports_written_and_read_back(tmp_path):
    reports = [Report("lookup", {"pack": "parity"}, 15), Report("lookup", {"pack": "allones"}, 15)]
    out = StringIO()
    assert write_reports(reports, out) == 2
    assert [json.loads(line)["inputs"]["pack"] for line in out.getvalue().splitlines()] == ["parity", "allones"]
    path = save_reports(reports, tmp_path / "reports.jsonl")
    assert read_reports(path)[1]["result"] == 15


if __name__ == "__main__":
    pytest.main([__file__])
