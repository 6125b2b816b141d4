#!/usr/bin/env python3
"""
DIMACS CNF reader and writer
"""

from typing import List, Sequence, Tuple

from ..core.errors import SatInputError


def parse_dimacs(text: str) -> Tuple[int, List[List[int]]]:
    """(variable count, clauses) from DIMACS CNF text

    Clauses may span lines; each ends at a 0. The clause count in the
    problem line must match the clauses read.
    """
    n = None
    declared = None
    clauses: List[List[int]] = []
    current: List[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise SatInputError(f"line {number}: malformed problem line {line!r}")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise SatInputError(f"line {number}: malformed problem line {line!r}")
            continue
        if n is None:
            raise SatInputError(f"line {number}: clause before the problem line")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise SatInputError(f"line {number}: {token!r} is not a literal")
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if n is None:
        raise SatInputError("missing problem line")
    if current:
        clauses.append(current)
    if declared is not None and declared != len(clauses):
        raise SatInputError(f"problem line declares {declared} clauses, found {len(clauses)}")
    return n, clauses


def format_dimacs(n: int, clauses: Sequence[Sequence[int]], comments: Sequence[str] = ()) -> str:
    lines = [f"c {comment}" for comment in comments]
    lines.append(f"p cnf {n} {len(clauses)}")
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in clauses)
    return "\n".join(lines) + "\n"
