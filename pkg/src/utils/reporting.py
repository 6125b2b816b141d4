#!/usr/bin/env python3
"""
JSON-lines reports: one ``{op, inputs, result, witness}`` record per line
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, TextIO, Union

import pandas as pd


def _default(value: Any):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, pd.DataFrame):
        return value.to_dict(orient="records")
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(record: Dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, no spaces"""
    return json.dumps(record, default=_default, sort_keys=True, separators=(",", ":"))


@dataclass
class Report:
    op: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    result: Any = None
    witness: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"op": self.op, "inputs": self.inputs, "result": self.result, "witness": self.witness}

    def line(self) -> str:
        return dumps(self.to_dict()) + "\n"


def write_reports(reports: Iterable[Report], out: TextIO) -> int:
    count = 0
    for report in reports:
        out.write(report.line())
        count += 1
    return count


def save_reports(reports: Iterable[Report], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        write_reports(reports, fh)
    return path


def read_reports(path: Union[str, Path]):
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]
