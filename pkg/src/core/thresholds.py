#!/usr/bin/env python3
"""
Explode/Collapse thresholds, doubling-stability evidence and rank arithmetic

All results here are finite evidence drawn from a measured trace; none of
them certifies asymptotic behaviour.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Any, Dict, List, Optional, Tuple

from .complexity import INFINITY, Level, classify, exp_rank, log_rank, oc_bound, poly_rank
from .errors import CoverageError, InputError, RankOverflowError, UnsupportedCombinationError
from .traces import GrowthFormula, Range, RuntimeTrace
from ..utils.parallel import parallel_map

logger = logging.getLogger(__name__)

EVIDENCE_NOTE = (
    "finite evidence for the doubling premise over the measured range; "
    "not a proof of asymptotic complexity"
)
MIN_CLASSIFY_N = 4


@dataclass(frozen=True)
class ThresholdResult:
    found: bool
    z: Optional[int]
    scanned_up_to: int
    grid: str = "every n"

    def to_dict(self) -> Dict[str, Any]:
        return {"found": self.found, "z": self.z, "scanned_up_to": self.scanned_up_to, "grid": self.grid}


@dataclass(frozen=True)
class DoublingCheck:
    n: int
    doubled: int
    premise: bool
    conclusion: bool

    @property
    def passed(self) -> bool:
        return (not self.premise) or self.conclusion


@dataclass(frozen=True)
class DoublingEvidence:
    stable: bool
    checked: Tuple[DoublingCheck, ...]
    first_failure: Optional[int] = None
    note: str = EVIDENCE_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stable": self.stable,
            "first_failure": self.first_failure,
            "checked": [[c.n, c.doubled, c.passed] for c in self.checked],
            "note": self.note,
        }


class RankKind(Enum):
    POLY = "PolyRank"
    LOG = "LogRank"
    EXP = "ExpRank"


@dataclass(frozen=True)
class RankExpr:
    """A rank value; for ExpRank the value is the rate 1/k"""
    kind: RankKind
    value: Fraction
    upper_bound: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise InputError(f"{self.kind.value} must be non-negative")

    def __str__(self) -> str:
        relation = " <= " if self.upper_bound else "="
        return f"{self.kind.value}{relation}{self.value}"


def _classify_prefix(trace: RuntimeTrace, n1: int, n0: int) -> Level:
    return classify(trace, Range(n1, n0)).level


def _prefix_levels(trace: RuntimeTrace, n1: int, ends: List[int], workers: int) -> List[Level]:
    return parallel_map(partial(_classify_prefix, trace, n1), ends, workers)


def explode(trace: RuntimeTrace, level: Level, n1: int, workers: int = 1) -> ThresholdResult:
    """First prefix end z at which [n1..z] classifies strictly above ``level``"""
    if not trace.covers(n1):
        raise CoverageError(n1)
    if n1 < MIN_CLASSIFY_N:
        raise InputError(f"explode needs n1 >= {MIN_CLASSIFY_N}")
    ends = trace.grid_points(n1, trace.end)
    grid = trace.grid_description()
    if workers <= 1:
        for n0 in ends:
            if _classify_prefix(trace, n1, n0) > level:
                return ThresholdResult(True, n0, trace.end, grid)
        return ThresholdResult(False, None, trace.end, grid)
    for n0, found_level in zip(ends, _prefix_levels(trace, n1, ends, workers)):
        if found_level > level:
            return ThresholdResult(True, n0, trace.end, grid)
    return ThresholdResult(False, None, trace.end, grid)


def collapse_base(trace: RuntimeTrace) -> int:
    """First grid point where prefix classification is defined"""
    for n in trace.ns:
        if n >= MIN_CLASSIFY_N:
            return n
    raise CoverageError(MIN_CLASSIFY_N)


def collapse(trace: RuntimeTrace, level: Level, n1: int, workers: int = 1) -> ThresholdResult:
    """Smallest z <= n1 with every prefix [base..n0], z <= n0 <= n1, at or below ``level``"""
    if not trace.covers(n1):
        raise CoverageError(n1)
    base = collapse_base(trace)
    ends = trace.grid_points(base, n1)
    grid = trace.grid_description()
    if not ends:
        raise CoverageError(n1)
    if workers <= 1:
        z = None
        for n0 in reversed(ends):
            if _classify_prefix(trace, base, n0) > level:
                break
            z = n0
    else:
        z = None
        for n0, found_level in reversed(list(zip(ends, _prefix_levels(trace, base, ends, workers)))):
            if found_level > level:
                break
            z = n0
    return ThresholdResult(z is not None, z, n1, grid)


def explosion_points(trace: RuntimeTrace, level: Level, workers: int = 1) -> List[Tuple[int, Optional[int]]]:
    """Explode evaluated from every grid start n1"""
    points = []
    for n1 in trace.grid_points(MIN_CLASSIFY_N, trace.end):
        result = explode(trace, level, n1, workers=workers)
        points.append((n1, result.z))
    return points


def _doubling_pairs(trace: RuntimeTrace, base: int, n0: int) -> List[Tuple[int, int]]:
    pairs = []
    for n in trace.grid_points(max(n0, base), trace.end // 2):
        doubled = 2 * n
        if not trace.covers(doubled):
            if trace.sampled:
                continue
            raise CoverageError(doubled)
        pairs.append((n, doubled))
    return pairs


def doubling_evidence(trace: RuntimeTrace, g: GrowthFormula, n0: int) -> DoublingEvidence:
    """Check OC on [base..n'] implies OC on [base..2n'] for every covered n' >= n0"""
    base = max(trace.base, 2)
    checks = []
    for n, doubled in _doubling_pairs(trace, base, n0):
        premise = oc_bound(trace, g, Range(base, n)).holds
        conclusion = oc_bound(trace, g, Range(base, doubled)).holds if premise else False
        checks.append(DoublingCheck(n, doubled, premise, conclusion))
    return _evidence(checks)


def _evidence(checks: List[DoublingCheck]) -> DoublingEvidence:
    failure = next((c.n for c in checks if not c.passed), None)
    return DoublingEvidence(stable=failure is None, checked=tuple(checks), first_failure=failure)


def _measure(trace: RuntimeTrace, measure: str, rng: Range):
    if measure == "poly_rank":
        try:
            return poly_rank(trace, rng)
        except RankOverflowError:
            return INFINITY
    if measure == "log_rank":
        return log_rank(trace, rng)
    if measure == "exp_rank":
        return exp_rank(trace, rng)
    if measure == "level":
        return classify(trace, rng).level
    raise InputError(f"unknown measure {measure!r}")


def rank_doubling_evidence(trace: RuntimeTrace, measure: str, n0: int) -> DoublingEvidence:
    """Doubling evidence for the rank and class forms

    With k the measure on [base..n0], checks measure on [base..n'] <= k
    implies measure on [base..2n'] <= k.
    """
    base = collapse_base(trace)
    if n0 < base:
        raise InputError(f"n0 must be at least {base}")
    reference = _measure(trace, measure, Range(base, n0))
    checks = []
    for n, doubled in _doubling_pairs(trace, base, n0):
        premise = _measure(trace, measure, Range(base, n)) <= reference
        conclusion = _measure(trace, measure, Range(base, doubled)) <= reference if premise else False
        checks.append(DoublingCheck(n, doubled, premise, conclusion))
    return _evidence(checks)


def compose_ranks(call_count: RankExpr, callee: RankExpr) -> RankExpr:
    """Rank of repeating a callee ``call_count`` times; an upper bound"""
    if call_count.kind is not callee.kind:
        raise UnsupportedCombinationError(
            f"cannot compose {call_count.kind.value} with {callee.kind.value}"
        )
    return RankExpr(callee.kind, call_count.value + callee.value, upper_bound=True)
