#!/usr/bin/env python3
"""
Runtime traces, ranges and comparison formulas

A RuntimeTrace is a measured worst-case operation count per input size; a
GrowthFormula is the comparison function g(n) it is bounded against. Both are
immutable so every calculus operation is a pure function over them.
"""

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath

from .errors import CoverageError, InputError, TraceValidationError

LOG_DIGITS = 12
EXP_DIGITS = 30


class FormulaKind(Enum):
    """Comparison function families"""
    CONST = "const"
    LOG_POW = "logpow"
    POLY = "poly"
    EXP = "exp"


@lru_cache(maxsize=None)
def _log2_rational(n: int) -> Fraction:
    """Base-2 log rounded to 12 significant digits (exact on powers of two)"""
    if n & (n - 1) == 0:
        return Fraction(n.bit_length() - 1)
    return Fraction(format(math.log2(n), f".{LOG_DIGITS}g"))


def _mp_fraction(value, digits: int) -> Fraction:
    return Fraction(mpmath.nstr(value, digits, strip_zeros=False))


@lru_cache(maxsize=None)
def _pow2_fractional(frac: Fraction) -> Fraction:
    with mpmath.workdps(EXP_DIGITS + 5):
        value = mpmath.power(2, mpmath.mpf(frac.numerator) / frac.denominator)
        return _mp_fraction(value, EXP_DIGITS)


@lru_cache(maxsize=None)
def _evaluate(kind: FormulaKind, param: Fraction, n: int) -> Fraction:
    if kind is FormulaKind.CONST:
        return param
    if kind is FormulaKind.LOG_POW:
        base = _log2_rational(n)
        if param.denominator == 1:
            return base ** int(param)
        return Fraction(format(float(base) ** float(param), f".{LOG_DIGITS}g"))
    if kind is FormulaKind.POLY:
        if param.denominator == 1:
            return Fraction(n ** int(param))
        with mpmath.workdps(EXP_DIGITS + 5):
            value = mpmath.power(n, mpmath.mpf(param.numerator) / param.denominator)
            return _mp_fraction(value, EXP_DIGITS)
    exponent = param * n
    whole = math.floor(exponent)
    result = Fraction(2) ** whole
    if exponent != whole:
        result *= _pow2_fractional(exponent - whole)
    return result


@dataclass(frozen=True)
class GrowthFormula:
    """Comparison function g(n) from {Const(c0), LogPow(k), Poly(k), Exp(r)}

    Exp(r) stands for 2^(r*n); parameters are exact rationals.
    """
    kind: FormulaKind
    param: Fraction

    def __post_init__(self):
        object.__setattr__(self, "param", Fraction(self.param))
        if self.kind is FormulaKind.CONST and self.param <= 0:
            raise InputError("Const formula needs a positive constant")
        if self.kind is FormulaKind.LOG_POW and self.param < 1:
            raise InputError("LogPow formula needs k >= 1")
        if self.kind is FormulaKind.POLY and self.param < 0:
            raise InputError("Poly formula needs k >= 0")
        if self.kind is FormulaKind.EXP and self.param <= 0:
            raise InputError("Exp formula needs r > 0")

    @classmethod
    def const(cls, c0=1) -> "GrowthFormula":
        return cls(FormulaKind.CONST, Fraction(c0))

    @classmethod
    def log_pow(cls, k) -> "GrowthFormula":
        return cls(FormulaKind.LOG_POW, Fraction(k))

    @classmethod
    def poly(cls, k) -> "GrowthFormula":
        return cls(FormulaKind.POLY, Fraction(k))

    @classmethod
    def exp(cls, r) -> "GrowthFormula":
        return cls(FormulaKind.EXP, Fraction(r))

    def evaluate(self, n: int) -> Fraction:
        if n < 2 and self.kind is FormulaKind.LOG_POW:
            raise InputError("LogPow is undefined below n=2")
        return _evaluate(self.kind, self.param, n)

    def __str__(self) -> str:
        names = {
            FormulaKind.CONST: "Const",
            FormulaKind.LOG_POW: "LogPow",
            FormulaKind.POLY: "Poly",
            FormulaKind.EXP: "Exp",
        }
        return f"{names[self.kind]}({self.param})"


@dataclass(frozen=True)
class Range:
    """Closed size range [n1..n0]"""
    n1: int
    n0: int

    def __post_init__(self):
        if self.n1 < 2 or self.n1 > self.n0:
            raise InputError(f"invalid range {self.n1}..{self.n0}: need 2 <= n1 <= n0")

    @property
    def midpoint(self) -> int:
        return (self.n1 + self.n0) // 2

    def lower_half(self) -> "Range":
        return Range(self.n1, self.midpoint)

    def __contains__(self, n: int) -> bool:
        return self.n1 <= n <= self.n0

    def __str__(self) -> str:
        return f"{self.n1}..{self.n0}"

    @classmethod
    def parse(cls, text: str) -> "Range":
        """Parse the CLI form ``n1..n0``"""
        parts = text.split("..")
        if len(parts) != 2:
            raise InputError(f"range must look like n1..n0, got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            raise InputError(f"range bounds must be integers, got {text!r}")


@dataclass(frozen=True)
class RuntimeTrace:
    """Measured worst-case costs f(n) over increasing sizes

    A dense trace covers every integer between its first and last n; a
    sampled trace (e.g. powers of two) quantifies over its grid points only.
    """
    points: Tuple[Tuple[int, int], ...]
    label: str = ""
    sampled: bool = False
    _costs: Dict[int, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple((int(n), int(c)) for n, c in self.points)
        if not points:
            raise TraceValidationError("trace has no points")
        previous = None
        for n, cost in points:
            if cost < 1:
                raise TraceValidationError(f"cost must be >= 1 at n={n}", n=n)
            if previous is not None:
                if n <= previous[0]:
                    raise TraceValidationError(f"n values must strictly increase at n={n}", n=n)
                if cost < previous[1]:
                    raise TraceValidationError(f"monotonicity violated at n={n}", n=n)
            previous = (n, cost)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_costs", dict(points))

    @property
    def ns(self) -> List[int]:
        return [n for n, _ in self.points]

    @property
    def base(self) -> int:
        return self.points[0][0]

    @property
    def end(self) -> int:
        return self.points[-1][0]

    def cost(self, n: int) -> int:
        try:
            return self._costs[n]
        except KeyError:
            raise CoverageError(n)

    def covers(self, n: int) -> bool:
        return n in self._costs

    def covered(self, rng: Range) -> List[int]:
        """Sizes in the range the quantifiers run over; raises on gaps"""
        if self.sampled:
            # n0 may fall between grid points (midpoint halves); n1 may not
            if rng.n1 not in self._costs:
                raise CoverageError(rng.n1)
            return [n for n in self.ns if rng.n1 <= n <= rng.n0]
        for n in range(rng.n1, rng.n0 + 1):
            if n not in self._costs:
                raise CoverageError(n)
        return list(range(rng.n1, rng.n0 + 1))

    def grid_points(self, lo: int, hi: int) -> List[int]:
        return [n for n in self.ns if lo <= n <= hi]

    def grid_description(self) -> str:
        return "sampled grid" if self.sampled else "every n"


def trace_from_function(fn: Callable[[int], int], ns: Iterable[int], label: str = "",
                        sampled: Optional[bool] = None) -> RuntimeTrace:
    """Tabulate an integer cost function over the given sizes"""
    ns = list(ns)
    if sampled is None:
        sampled = any(b - a != 1 for a, b in zip(ns, ns[1:]))
    return RuntimeTrace(tuple((n, int(fn(n))) for n in ns), label=label, sampled=sampled)


def trace_from_formula(g: GrowthFormula, ns: Iterable[int], label: str = "") -> RuntimeTrace:
    """Tabulate ceil(g(n)) so the trace is bounded by g with constant 1"""
    return trace_from_function(lambda n: max(1, math.ceil(g.evaluate(n))), ns, label or str(g))


def powers_of_two(lo: int, hi: int) -> List[int]:
    """Grid of powers of two within [lo..hi]"""
    grid = []
    p = 1
    while p <= hi:
        if p >= lo:
            grid.append(p)
        p <<= 1
    return grid


def floyd_warshall_trace(ns: Sequence[int], seed: int = 0) -> RuntimeTrace:
    """Operation counts of an instrumented Floyd-Warshall on random dense graphs"""
    rng = random.Random(seed)
    points = []
    for n in ns:
        inf = float("inf")
        dist = [[0 if i == j else rng.randint(1, 100) for j in range(n)] for i in range(n)]
        ops = 0
        for i in range(n):
            for j in range(n):
                ops += 1
                if i != j and rng.random() < 0.3:
                    dist[i][j] = inf
        for k in range(n):
            row_k = dist[k]
            for i in range(n):
                row_i = dist[i]
                through = row_i[k]
                for j in range(n):
                    ops += 1
                    candidate = through + row_k[j]
                    if candidate < row_i[j]:
                        row_i[j] = candidate
        points.append((n, ops))
    sampled = any(b - a != 1 for a, b in zip(ns, ns[1:]))
    return RuntimeTrace(tuple(points), label="floyd-warshall", sampled=sampled)


def variable_complexity_trace(segments: Sequence[Tuple[int, GrowthFormula]], n_max: int,
                              label: str = "variable") -> RuntimeTrace:
    """Monotone trace following a different formula on each segment

    ``segments`` is a list of (start n, formula) sorted by start. Each segment
    is scaled to continue from the last value of the previous one, so the
    trace changes class exactly where a new segment begins.
    """
    if not segments:
        raise InputError("at least one segment is required")
    starts = [start for start, _ in segments]
    if starts != sorted(starts) or len(set(starts)) != len(starts):
        raise InputError("segment starts must strictly increase")
    first = starts[0]
    points = []
    previous = 1
    index = 0
    scale = Fraction(1)
    for n in range(first, n_max + 1):
        while index + 1 < len(segments) and n >= segments[index + 1][0]:
            index += 1
            g = segments[index][1]
            scale = Fraction(previous) / g.evaluate(n)
        if n == first:
            scale = Fraction(1)
        g = segments[index][1]
        cost = max(previous, math.ceil(scale * g.evaluate(n)), 1)
        points.append((n, cost))
        previous = cost
    return RuntimeTrace(tuple(points), label=label)
