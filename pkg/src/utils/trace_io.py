#!/usr/bin/env python3
"""
Runtime trace CSV files

Expected columns: ``n,cost`` with a header row. Errors cite the file line
(the header is line 1).
"""

from pathlib import Path
from typing import Optional, Union

import pandas as pd

from ..core.errors import TraceValidationError
from ..core.traces import RuntimeTrace

REQUIRED_COLUMNS = ("n", "cost")


def _to_int(text, column: str, line: int) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        raise TraceValidationError(f"{column} must be an integer, got {text!r}", line=line)


def read_trace_csv(path: Union[str, Path], label: Optional[str] = None,
                   sampled: Optional[bool] = None) -> RuntimeTrace:
    """Load and validate a trace; ``sampled`` defaults to "the n column has gaps" """
    path = Path(path)
    if not path.is_file():
        raise TraceValidationError(f"{path}: no such trace file")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise TraceValidationError(f"{path}: unreadable CSV ({exc})")
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise TraceValidationError(f"missing column(s) {', '.join(missing)}", line=1)

    points = []
    lines = {}
    for offset, row in enumerate(frame.itertuples(index=False)):
        line = offset + 2
        raw_n, raw_cost = getattr(row, "n"), getattr(row, "cost")
        if raw_n == "" and raw_cost == "":
            continue
        n = _to_int(raw_n, "n", line)
        cost = _to_int(raw_cost, "cost", line)
        if points:
            if n <= points[-1][0]:
                raise TraceValidationError(f"n values must strictly increase at n={n}", line=line, n=n)
            if cost < points[-1][1]:
                raise TraceValidationError(f"monotonicity violated at n={n}", line=line, n=n)
        if cost < 1:
            raise TraceValidationError(f"cost must be >= 1 at n={n}", line=line, n=n)
        points.append((n, cost))
        lines[n] = line
    if not points:
        raise TraceValidationError(f"{path}: trace has no points")
    if sampled is None:
        sampled = any(b[0] - a[0] != 1 for a, b in zip(points, points[1:]))
    return RuntimeTrace(tuple(points), label=label or path.stem, sampled=sampled)


def write_trace_csv(trace: RuntimeTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    pd.DataFrame(list(trace.points), columns=list(REQUIRED_COLUMNS)).to_csv(path, index=False)
    return path
