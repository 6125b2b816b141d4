#!/usr/bin/env python3
"""
Command line tests: stdout records and exit codes
"""

import json
import sys
from io import StringIO
from pathlib import Path

import pytest

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli.main import main
from src.core.traces import powers_of_two, trace_from_function
from src.utils.trace_io import write_trace_csv


@pytest.fixture(autouse=True)
def workspace(tmp_path, monkeypatch):
    """Run every command from a scratch directory so outputs/ lands there"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    out = StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def quintic_csv(workspace):
    return write_trace_csv(trace_from_function(lambda n: n ** 5, powers_of_two(4, 1024)), workspace / "n5.csv")


@pytest.fixture
def quadratic_csv(workspace):
    return write_trace_csv(trace_from_function(lambda n: n * n, range(2, 65)), workspace / "n2.csv")


def test_classify_text(quintic_csv):
    code, text = run("classify", str(quintic_csv), "--range", "4..1024", "--format", "text")
    assert code == 0
    assert text == "SemiPoly, PolyRank=5\n"


def test_classify_json(quintic_csv):
    code, text = run("classify", str(quintic_csv), "--range", "4..1024")
    assert code == 0
    (record,) = records(text)
    assert record["op"] == "classify"
    assert record["result"] == "SemiPoly, PolyRank=5"
    assert record["witness"]["level"] == "SemiPoly"
    assert record["inputs"]["range"] == "4..1024"


def test_explode_and_collapse(quadratic_csv):
    code, text = run("explode", str(quadratic_csv), "--level", "Linear", "--n1", "4", "--workers", "1",
                     "--format", "text")
    assert code == 0
    assert text == "explode Linear from n1=4: 5\n"
    code, text = run("collapse", str(quadratic_csv), "--level", "Linear", "--n1", "64", "--workers", "1")
    assert code == 0
    assert records(text)[0]["witness"]["found"] is False


def test_annex_csv():
    code, text = run("annex", "--profile", "SCC", "--format", "csv")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "class,duration_seconds,profile,budget_ops,max_n"
    assert len(lines) == 1 + 5 * 7
    assert "Exp,1,SCC,10000000,16" in lines


def test_annex_text_and_workbook(workspace):
    code, text = run("annex", "--profile", "custom:1000:2", "--divide-exp-by-8", "--xlsx",
                     str(workspace / "annex.xlsx"), "--format", "text")
    assert code == 0
    assert "ExpRank = 1 (divided by 8)" in text
    assert (workspace / "annex.xlsx").exists()


def test_census():
    code, text = run("census", "--bit-length", "4", "--max-len", "3", "--fuel", "16")
    assert code == 0
    (record,) = records(text)
    assert record["inputs"] == {"bit_length": 4}
    assert record["result"]["compressible"] >= 2
    assert record["result"]["compressible"] + record["result"]["incompressible"] == 16


def test_lookup(workspace):
    code, text = run("lookup", "parity", "--n0", "3", "--output", str(workspace / "out"))
    assert code == 0
    (record,) = records(text)
    assert record["result"] == 15
    assert record["witness"]["correct"] == 15
    assert record["witness"]["max_probes"] <= 4
    assert Path(record["witness"]["hint"]).stat().st_size == record["witness"]["hint_bytes"]


def test_doubling_writes_winner_and_history(workspace):
    out = workspace / "out"
    code, text = run("doubling", "firstbit", "--n-start", "2", "--window", "1", "--max-doublings", "3",
                     "--program-max-len", "3", "--hint-max-bytes", "0", "--fuel", "50", "--output", str(out))
    assert code == 0
    (record,) = records(text)
    assert record["result"] is True
    witness = record["witness"]
    assert Path(witness["program_file"]).read_text() == "READ_INPUT 0\nOUTPUT\nHALT\n"
    assert Path(witness["program_file"]).name == "firstbit-doubling-n8.program"
    assert Path(witness["hint_file"]).read_bytes() == b""
    history = json.loads(Path(witness["history_file"]).read_text())
    assert [step["n"] for step in history["history"]] == [2, 4, 8]
    assert history["stable"] is True


def test_mine():
    code, text = run("mine", "--lo", "100", "--hi", "200", "--budget", "300", "--seed", "1", "--workers", "1")
    assert code == 0
    (record,) = records(text)
    assert record["op"] == "mine"
    assert all(100 <= p < 200 for p in record["result"])


@pytest.mark.parametrize("argv", [
    ["annex", "--profile", "fast"],
    ["search", "sat", "--n0", "3"],
    ["mine", "--lo", "10", "--hi", "20"],
    ["census", "--bit-length", "20"],
    ["lookup", "tsp", "--n0", "3"],
    ["lookup", "parity", "--n0", "3", "--fuel", "0"],
    ["classify", "missing.csv"],
])
def test_input_errors_exit_2(argv):
    code, text = run(*argv)
    assert code == 2
    assert text == ""


def test_non_monotone_trace_exits_2(workspace):
    path = workspace / "bad.csv"
    path.write_text("n,cost\n4,16\n5,25\n6,20\n")
    code, _ = run("classify", str(path))
    assert code == 2


def test_search_budget_exhaustion_exits_3(workspace):
    checkpoint = workspace / "parity.json"
    code, text = run("search", "parity", "--n0", "2", "--steps", "1", "--checkpoint", str(checkpoint))
    assert code == 3
    (record,) = records(text)
    assert record["result"] is None
    assert record["witness"]["checkpoint"] == str(checkpoint)
    assert checkpoint.exists()


if __name__ == "__main__":
    pytest.main([__file__])
