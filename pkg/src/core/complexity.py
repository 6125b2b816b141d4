#!/usr/bin/env python3
"""
Finite complexity calculus

Bounded-constant bounds, minimal constants, the apparent-complexity midpoint
test, certain finite complexity (OC), the three rank functions and the
seven-level class hierarchy. Every check is evaluated on a bounded range of a
measured trace with exact rational arithmetic.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import InputError, RankOverflowError
from .traces import GrowthFormula, Range, RuntimeTrace

logger = logging.getLogger(__name__)

INFINITY = math.inf
Rank = Union[int, float]
ExpRankValue = Union[Fraction, float]

DEFAULT_POLY_RANK_CAP = 64
DEFAULT_EXP_RANK_DENOMINATOR = 16
DEFAULT_EXP_THRESHOLD = 8


class Level(IntEnum):
    """Finite complexity classes, ordered from slowest to fastest growth"""
    CONST = 1
    POLYLOG = 2
    LINEAR = 3
    POLY = 4
    SEMIPOLY = 5
    EXP = 6
    INTR = 7

    @property
    def label(self) -> str:
        return _LEVEL_LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Level":
        key = text.strip().lower()
        for level, name in _LEVEL_LABELS.items():
            if name.lower() == key:
                return level
        raise InputError(f"unknown class level {text!r}")


_LEVEL_LABELS = {
    Level.CONST: "Const",
    Level.POLYLOG: "PolyLog",
    Level.LINEAR: "Linear",
    Level.POLY: "Poly",
    Level.SEMIPOLY: "SemiPoly",
    Level.EXP: "Exp",
    Level.INTR: "Intr",
}


@dataclass(frozen=True)
class BoundWitness:
    """Outcome of a bound check with the constants that decided it"""
    holds: bool
    failing_n: Optional[int] = None
    const_endpoint: Optional[int] = None
    const_midpoint: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "failing_n": self.failing_n,
            "const_endpoint": self.const_endpoint,
            "const_midpoint": self.const_midpoint,
        }


@dataclass(frozen=True)
class ThresholdOffsets:
    """Additive constants in the PolyLog, Poly and SemiPoly thresholds"""
    polylog: int = 0
    poly: int = 1
    semipoly: int = 1


@dataclass(frozen=True)
class ClassLabel:
    """Class level assigned to a (trace, range) pair plus the ranks consulted"""
    level: Level
    range: Range
    log_rank: Optional[Rank] = None
    poly_rank: Optional[Rank] = None
    exp_rank: Optional[ExpRankValue] = None
    thresholds: Dict[str, float] = field(default_factory=dict, compare=False)

    def evidence(self) -> Dict[str, Any]:
        evidence = {}
        if self.log_rank is not None:
            evidence["LogRank"] = _rank_text(self.log_rank)
        if self.poly_rank is not None:
            evidence["PolyRank"] = _rank_text(self.poly_rank)
        if self.exp_rank is not None:
            evidence["ExpRank"] = _rank_text(self.exp_rank)
        return evidence

    def describe(self) -> str:
        """Short human form, e.g. ``Poly, PolyRank=3``"""
        headline = {
            Level.POLYLOG: "LogRank",
            Level.POLY: "PolyRank",
            Level.SEMIPOLY: "PolyRank",
            Level.EXP: "ExpRank",
            Level.INTR: "ExpRank",
        }.get(self.level)
        if headline is None:
            return self.level.label
        value = self.evidence().get(headline)
        return f"{self.level.label}, {headline}={value}" if value is not None else self.level.label

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level.label,
            "level_index": int(self.level),
            "range": str(self.range),
            "evidence": self.evidence(),
            "thresholds": dict(self.thresholds),
        }


def _rank_text(value) -> str:
    if value == INFINITY:
        return "inf"
    if isinstance(value, Fraction) and value.denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    return str(int(value))


def _max_ratio(trace: RuntimeTrace, g: GrowthFormula, rng: Range) -> Tuple[Fraction, int]:
    best = None
    best_n = rng.n1
    for n in trace.covered(rng):
        ratio = Fraction(trace.cost(n)) / g.evaluate(n)
        if best is None or ratio > best:
            best, best_n = ratio, n
    return best, best_n


def bound_holds(trace: RuntimeTrace, g: GrowthFormula, c: int, rng: Range) -> BoundWitness:
    """Check cost(n) <= c * g(n) at every covered n in the range"""
    for n in trace.covered(rng):
        if trace.cost(n) > c * g.evaluate(n):
            return BoundWitness(holds=False, failing_n=n)
    return BoundWitness(holds=True)


def min_const(trace: RuntimeTrace, g: GrowthFormula, rng: Range) -> int:
    """Smallest natural c making the bounded-constant bound hold"""
    ratio, _ = _max_ratio(trace, g, rng)
    return max(1, math.ceil(ratio))


def apparent_bound(trace: RuntimeTrace, g: GrowthFormula, h_at_n0, rng: Range) -> BoundWitness:
    """Midpoint growth test: Const on [n1..n0] <= h(n0) * Const on [n1..mid]"""
    h = Fraction(h_at_n0)
    lower = rng.lower_half()
    end_ratio, end_n = _max_ratio(trace, g, rng)
    c_end = max(1, math.ceil(end_ratio))
    c_mid = min_const(trace, g, lower)
    holds = c_end <= h * c_mid
    return BoundWitness(
        holds=holds,
        failing_n=None if holds else end_n,
        const_endpoint=c_end,
        const_midpoint=c_mid,
    )


def oc_factor(n0: int) -> Fraction:
    return 1 + Fraction(1, n0 * n0)


def oc_bound(trace: RuntimeTrace, g: GrowthFormula, rng: Range) -> BoundWitness:
    """Certain finite complexity: the midpoint test with h(n0) = 1 + 1/n0^2"""
    return apparent_bound(trace, g, oc_factor(rng.n0), rng)


def oc_factor_product(n_max: int) -> float:
    """Running product of (1 + 1/n^2) for n = 1..n_max"""
    n = np.arange(1, n_max + 1, dtype=np.float64)
    return float(np.exp(np.sum(np.log1p(1.0 / (n * n)))))


def poly_rank(trace: RuntimeTrace, rng: Range, cap: int = DEFAULT_POLY_RANK_CAP) -> int:
    """Smallest k >= 1 with the factor-2 midpoint test passing against n^(k-1)"""
    for k in range(1, cap + 1):
        if apparent_bound(trace, GrowthFormula.poly(k - 1), 2, rng).holds:
            return k
    raise RankOverflowError(cap)


def _require_loglog(rng: Range) -> None:
    if rng.n1 < 4:
        raise InputError(f"range {rng} must start at n1 >= 4")


def log_rank(trace: RuntimeTrace, rng: Range) -> Rank:
    """Smallest k >= 1 with OC against log^k(n), searched up to ceil(log2 n0)"""
    _require_loglog(rng)
    k_max = max(1, math.ceil(math.log2(rng.n0)))
    for k in range(1, k_max + 1):
        if oc_bound(trace, GrowthFormula.log_pow(k), rng).holds:
            return k
    return INFINITY


def exp_rank_grid(n0: int, max_denominator: int = DEFAULT_EXP_RANK_DENOMINATOR) -> List[Fraction]:
    """Candidate k values for 2^(n/k), ascending

    Fractional k goes down to 1/max_denominator (1/16 by default) so that
    growth as steep as 2^(9n) still gets the finite rank 9.
    """
    fractional = [Fraction(1, d) for d in range(max_denominator, 1, -1)]
    return fractional + [Fraction(k) for k in range(1, max(n0, 1) + 1)]


def exp_rank(trace: RuntimeTrace, rng: Range,
             max_denominator: int = DEFAULT_EXP_RANK_DENOMINATOR) -> ExpRankValue:
    """1/k for the largest grid k with OC against 2^(n/k)

    The grid is scanned from the steepest member upward and the scan stops at
    the first failure after a pass, so k is the end of the first passing run.
    """
    best = None
    for k in exp_rank_grid(rng.n0, max_denominator):
        if oc_bound(trace, GrowthFormula.exp(1 / k), rng).holds:
            best = k
        elif best is not None:
            break
        else:
            return INFINITY
    return 1 / best


def _fits(rank, limit: float) -> bool:
    return rank is not None and rank != INFINITY and rank <= limit


def classify(trace: RuntimeTrace, rng: Range, offsets: Optional[ThresholdOffsets] = None,
             poly_rank_cap: int = DEFAULT_POLY_RANK_CAP,
             exp_threshold: int = DEFAULT_EXP_THRESHOLD,
             exp_max_denominator: int = DEFAULT_EXP_RANK_DENOMINATOR) -> ClassLabel:
    """Assign exactly one class level; tests run from Const upward"""
    _require_loglog(rng)
    offsets = offsets or ThresholdOffsets()
    log2_n0 = math.log2(rng.n0)
    log2_log2_n0 = math.log2(log2_n0)
    thresholds = {
        "polylog": log2_n0 / log2_log2_n0 + offsets.polylog,
        "poly": offsets.poly + log2_log2_n0,
        "semipoly": offsets.semipoly + log2_n0,
        "exp": float(exp_threshold),
    }

    lr = log_rank(trace, rng)
    one = GrowthFormula.const(1)
    if (lr <= 1 and oc_bound(trace, one, rng).holds
            and min_const(trace, one, rng) == min_const(trace, one, rng.lower_half())):
        return ClassLabel(Level.CONST, rng, log_rank=lr, thresholds=thresholds)
    if _fits(lr, thresholds["polylog"]):
        return ClassLabel(Level.POLYLOG, rng, log_rank=lr, thresholds=thresholds)
    if oc_bound(trace, GrowthFormula.poly(1), rng).holds:
        return ClassLabel(Level.LINEAR, rng, log_rank=lr, thresholds=thresholds)

    try:
        pr: Rank = poly_rank(trace, rng, cap=poly_rank_cap)
    except RankOverflowError:
        logger.debug("PolyRank overflow on %s over %s", trace.label, rng)
        pr = INFINITY
    if _fits(pr, thresholds["poly"]):
        return ClassLabel(Level.POLY, rng, log_rank=lr, poly_rank=pr, thresholds=thresholds)
    if _fits(pr, thresholds["semipoly"]):
        return ClassLabel(Level.SEMIPOLY, rng, log_rank=lr, poly_rank=pr, thresholds=thresholds)

    er = exp_rank(trace, rng, max_denominator=exp_max_denominator)
    level = Level.EXP if _fits(er, thresholds["exp"]) else Level.INTR
    return ClassLabel(level, rng, log_rank=lr, poly_rank=pr, exp_rank=er, thresholds=thresholds)
