#!/usr/bin/env python3
"""
Exhaustive answer tables and the decision-to-search reduction

``build_lookup_hint`` precomputes the correct output of every input of size at
most n0 and packs the table into a hint; the accompanying solver answers a
query by binary search over it. ``reduce_to_decision`` recovers the smallest
correct output from an "exists a correct output below x" oracle.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from ..config.settings import settings
from .errors import InputError, MemoryBudgetError, NoOutputError
from .problem import HintedProgram, ProblemStatement
from .vm import Hint

logger = logging.getLogger(__name__)

HEADER = struct.Struct(">HBI")


def input_key(bits: str) -> int:
    """Length-prefixed integer key: a leading 1 marks the length"""
    return (1 << len(bits)) | (int(bits, 2) if bits else 0)


def _key_bytes(n0: int) -> int:
    return (n0 + 8) // 8


def _output_bytes(width: int) -> int:
    return (width + 7) // 8


def table_size(n0: int) -> int:
    return (1 << (n0 + 1)) - 1


def estimated_hint_bytes(n0: int, width: int, entries: Optional[int] = None) -> int:
    entries = table_size(n0) if entries is None else entries
    return HEADER.size + entries * (_key_bytes(n0) + _output_bytes(width))


def encode_table(n0: int, width: int, rows: List[Tuple[str, str]]) -> Hint:
    key_len = _key_bytes(n0)
    out_len = _output_bytes(width)
    rows = sorted(rows, key=lambda row: input_key(row[0]))
    blob = bytearray(HEADER.pack(n0, width, len(rows)))
    for bits, output in rows:
        blob += input_key(bits).to_bytes(key_len, "big")
        blob += int(output, 2).to_bytes(out_len, "big")
    return Hint(bytes(blob))


class LookupSolver:
    """Initialize(hint) / Query(instance) over a packed answer table"""

    def __init__(self, hint: Hint):
        if hint.size < HEADER.size:
            raise InputError("lookup hint is shorter than its header")
        self.n0, self.width, self.count = HEADER.unpack_from(hint.data, 0)
        self.key_len = _key_bytes(self.n0)
        self.out_len = _output_bytes(self.width)
        self.stride = self.key_len + self.out_len
        if hint.size != HEADER.size + self.count * self.stride:
            raise InputError("lookup hint size does not match its header")
        self.data = hint.data

    def _entry(self, index: int) -> Tuple[int, int]:
        start = HEADER.size + index * self.stride
        key = int.from_bytes(self.data[start:start + self.key_len], "big")
        value = int.from_bytes(self.data[start + self.key_len:start + self.stride], "big")
        return key, value

    def query(self, bits: str) -> Tuple[Optional[str], int]:
        """(stored output or None, number of table probes)"""
        target = input_key(bits)
        lo, hi = 0, self.count - 1
        probes = 0
        while lo <= hi:
            mid = (lo + hi) // 2
            probes += 1
            key, value = self._entry(mid)
            if key == target:
                return format(value, f"0{self.width}b"), probes
            if key < target:
                lo = mid + 1
            else:
                hi = mid - 1
        return None, max(probes, 1)

    def entries(self) -> List[Tuple[int, int]]:
        return [self._entry(i) for i in range(self.count)]


def build_lookup_hint(problem: ProblemStatement, n0: Optional[int] = None,
                      memory_budget: Optional[int] = None) -> Tuple[Hint, HintedProgram]:
    """Answer table for every input of size <= n0 plus the lookup solver"""
    if n0 is not None and n0 != problem.n0:
        problem = problem.at_size(n0)
    budget = settings.LOOKUP_MEMORY_BUDGET_BYTES if memory_budget is None else memory_budget
    width = problem.output_bits
    if problem.n0 > 0xFFFF or width > 0xFF:
        raise InputError("lookup tables support n0 < 65536 and outputs below 256 bits")
    needed = estimated_hint_bytes(problem.n0, width)
    if needed > budget:
        logger.warning("Lookup table for %s at n0=%d needs %d bytes, budget %d",
                       problem.name, problem.n0, needed, budget)
        raise MemoryBudgetError(
            f"lookup table for n0={problem.n0} needs {needed} bytes, budget is {budget}"
        )
    rows = [(bits, problem.first_output(bits)) for bits in problem.inputs()]
    hint = encode_table(problem.n0, width, rows)
    logger.info("Built lookup table for %s: n0=%d, %d entries, %d bytes",
                problem.name, problem.n0, len(rows), hint.size)
    return hint, HintedProgram.lookup()


@dataclass(frozen=True)
class ReductionResult:
    value: int
    probes: int


def reduce_to_decision(decision_oracle: Callable[[int], bool], output_universe_size: int,
                       assume_complete: bool = True) -> ReductionResult:
    """Smallest correct output through "exists a correct output < x" probes

    The search uses at most ceil(log2 U) probes. A complete problem always
    has a correct output, so the top of the universe is not probed unless
    ``assume_complete`` is off, which costs one extra probe when every other
    probe came back false.
    """
    if output_universe_size < 1:
        raise InputError("output universe must be non-empty")
    lo, hi = 1, output_universe_size
    probes = 0
    seen_true = False
    if output_universe_size == 1:
        probes = 1
        if not decision_oracle(1):
            raise NoOutputError("no correct output in a universe of size 1")
        return ReductionResult(0, probes)
    while lo < hi:
        mid = (lo + hi) // 2
        probes += 1
        if decision_oracle(mid):
            hi = mid
            seen_true = True
        else:
            lo = mid + 1
    if not seen_true and not assume_complete:
        probes += 1
        if not decision_oracle(output_universe_size):
            raise NoOutputError(f"no correct output below {output_universe_size}")
    return ReductionResult(lo - 1, probes)


def existence_oracle(problem: ProblemStatement, input_bits: str) -> Callable[[int], bool]:
    """Decision form of a search problem: is some output below x accepted?"""
    width = problem.output_bits

    def below(x: int) -> bool:
        return any(problem.verifier(input_bits, format(value, f"0{width}b")) for value in range(min(x, 1 << width)))

    return below
