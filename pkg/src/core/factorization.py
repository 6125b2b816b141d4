#!/usr/bin/env python3
"""
Budgeted factorization and hard-prime mining

Every unit of work (one trial division, one primality test, one Pollard rho
iteration) costs one step. When the budget runs out the unfactored cofactors
are reported as they are, so the returned factors always multiply back to N.
"""

import logging
import random
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import gmpy2
import numpy as np
import pandas as pd

from ..config.settings import settings
from ..utils.parallel import parallel_map
from .errors import EmptyRangeError, FactorInputError, FiniteKitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorResult:
    n: int
    factors: Tuple[int, ...]
    steps: int
    timeout: bool

    def __post_init__(self):
        product = 1
        for f in self.factors:
            product *= f
        if product != self.n:
            raise FiniteKitError(f"factors {self.factors} do not multiply back to {self.n}")

    @property
    def complete(self) -> bool:
        return not self.timeout

    def to_dict(self):
        return {"n": self.n, "factors": list(self.factors), "steps": self.steps, "timeout": self.timeout}


class _Meter:
    def __init__(self, budget: int):
        self.budget = budget
        self.steps = 0

    def charge(self) -> bool:
        """Spend one step; False once the budget is gone"""
        if self.steps >= self.budget:
            return False
        self.steps += 1
        return True


def _small_primes(bound: int) -> List[int]:
    primes = []
    p = gmpy2.mpz(2)
    while p < bound:
        primes.append(int(p))
        p = gmpy2.next_prime(p)
    return primes


def _rho(m: int, c: int, meter: _Meter) -> Optional[int]:
    """One Floyd cycle search with x^2 + c; None on failure or budget exhaustion"""
    m = gmpy2.mpz(m)
    x = y = gmpy2.mpz(2)
    d = gmpy2.mpz(1)
    while d == 1:
        if not meter.charge():
            return None
        x = (x * x + c) % m
        y = (y * y + c) % m
        y = (y * y + c) % m
        d = gmpy2.gcd(abs(x - y), m)
    return None if d == m else int(d)


def _split_completely(m: int, meter: _Meter) -> Tuple[List[int], bool]:
    """Prime factors of m (trial division already done); second value is the timeout flag"""
    done: List[int] = []
    pending = [m]
    while pending:
        current = pending.pop()
        if current == 1:
            continue
        if not meter.charge():
            done.append(current)
            done.extend(pending)
            return done, True
        if gmpy2.is_prime(current):
            done.append(current)
            continue
        c = 1
        while True:
            d = _rho(current, c, meter)
            if d is not None:
                pending.extend([d, current // d])
                break
            if meter.steps >= meter.budget:
                done.append(current)
                done.extend(pending)
                return done, True
            c += 1
    return done, False


def factor_budgeted(n: int, step_budget: int, trial_bound: Optional[int] = None) -> FactorResult:
    """Trial division below ``trial_bound`` then Pollard rho (c = 1, 2, ...)"""
    if n < 2:
        raise FactorInputError(f"cannot factor {n}; N must be at least 2")
    trial_bound = settings.TRIAL_DIVISION_BOUND if trial_bound is None else trial_bound
    meter = _Meter(step_budget)
    factors: List[int] = []
    rest = n
    for p in _small_primes(trial_bound):
        if rest == 1 or p * p > rest:
            break
        while True:
            if not meter.charge():
                return FactorResult(n, tuple(sorted(factors + [rest])), meter.steps, True)
            if rest % p:
                break
            factors.append(p)
            rest //= p
    more, timeout = _split_completely(rest, meter)
    return FactorResult(n, tuple(sorted(factors + more)), meter.steps, timeout)


@dataclass(frozen=True)
class HardPrimeList:
    primes: Tuple[int, ...]
    step_budget: int
    seed: int = 0
    threshold: float = 0.0
    statistics: Optional[pd.DataFrame] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(sorted(self.primes)))

    def __contains__(self, p: int) -> bool:
        return p in self.primes

    def __len__(self) -> int:
        return len(self.primes)

    def to_text(self) -> str:
        return "".join(f"{p}\n" for p in self.primes)

    @classmethod
    def from_text(cls, text: str, step_budget: int = 0) -> "HardPrimeList":
        primes = []
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if not line.isdigit():
                raise FactorInputError(f"line {number}: {line!r} is not a decimal number")
            p = int(line)
            if not gmpy2.is_prime(p):
                raise FactorInputError(f"line {number}: {p} is not prime")
            primes.append(p)
        return cls(tuple(primes), step_budget)

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(self.to_text())
        return path

    @classmethod
    def load(cls, path: Path, step_budget: int = 0) -> "HardPrimeList":
        return cls.from_text(Path(path).read_text(), step_budget)


def primes_in_range(lo: int, hi: int) -> List[int]:
    """Primes p with lo <= p < hi"""
    primes = []
    p = gmpy2.next_prime(max(lo, 2) - 1)
    while p < hi:
        primes.append(int(p))
        p = gmpy2.next_prime(p)
    return primes


def _median_steps(job: Tuple[int, Tuple[int, ...]], step_budget: int, trial_bound: int) -> Tuple[float, int]:
    p, partners = job
    results = [factor_budgeted(p * q, step_budget, trial_bound) for q in partners]
    return float(np.median([r.steps for r in results])), sum(r.timeout for r in results)


def mine_hard_primes(lo: int, hi: int, step_budget: int, seed: int, pairings: Optional[int] = None,
                     percentile: Optional[float] = None, trial_bound: Optional[int] = None,
                     workers: int = 1) -> HardPrimeList:
    """Flag primes whose semiprimes take the budgeted factorizer longest

    Each prime in [lo, hi) is paired with ``pairings`` partners drawn from the
    same range; a prime is flagged when its median step count reaches the
    ``percentile`` of all medians.
    """
    pairings = settings.HARD_PRIME_PAIRINGS if pairings is None else pairings
    percentile = settings.HARD_PRIME_PERCENTILE if percentile is None else percentile
    trial_bound = settings.TRIAL_DIVISION_BOUND if trial_bound is None else trial_bound
    primes = primes_in_range(lo, hi)
    if not primes:
        raise EmptyRangeError(f"no primes in [{lo}, {hi})")
    rng = random.Random(seed)
    jobs = [(p, tuple(rng.choice(primes) for _ in range(pairings))) for p in primes]
    logger.info("Mining %d primes in [%d, %d) with %d pairings each", len(primes), lo, hi, pairings)
    measured = parallel_map(partial(_median_steps, step_budget=step_budget, trial_bound=trial_bound),
                            jobs, workers)
    stats = pd.DataFrame({
        "prime": primes,
        "median_steps": [m for m, _ in measured],
        "timeouts": [t for _, t in measured],
    })
    threshold = float(np.percentile(stats["median_steps"], percentile))
    # ties at the threshold count, so a budget-capped tail is still flagged
    stats["flagged"] = stats["median_steps"] >= threshold
    flagged = tuple(int(p) for p in stats.loc[stats["flagged"], "prime"])
    logger.info("Flagged %d of %d primes (threshold %.1f steps)", len(flagged), len(primes), threshold)
    return HardPrimeList(flagged, step_budget, seed, threshold, stats)


def factor_hinted(n: int, hints: Sequence[int], step_budget: int,
                  trial_bound: Optional[int] = None) -> FactorResult:
    """Divide by each hint prime first, then fall back to factor_budgeted on what is left

    Steps are counted as in factor_budgeted: one per primality check of the
    cofactor and one per hint prime tried.
    """
    if n < 2:
        raise FactorInputError(f"cannot factor {n}; N must be at least 2")
    hints = list(hints.primes if isinstance(hints, HardPrimeList) else hints)
    meter = _Meter(step_budget)
    found: List[int] = []
    rest = n

    def timed_out() -> FactorResult:
        return FactorResult(n, tuple(sorted(found + [rest])), meter.steps, True)

    rest_is_prime = False
    for p in hints:
        if rest == 1:
            break
        if not meter.charge():
            return timed_out()
        if gmpy2.is_prime(rest):
            rest_is_prime = True
            break
        if not meter.charge():
            return timed_out()
        while rest % p == 0:
            found.append(p)
            rest //= p
    if rest == 1:
        return FactorResult(n, tuple(sorted(found)), meter.steps, False)
    if found and not rest_is_prime:
        if not meter.charge():
            return timed_out()
        rest_is_prime = bool(gmpy2.is_prime(rest))
    if rest_is_prime:
        return FactorResult(n, tuple(sorted(found + [rest])), meter.steps, False)
    fallback = factor_budgeted(rest, step_budget - meter.steps, trial_bound)
    return FactorResult(n, tuple(sorted(found + list(fallback.factors))), meter.steps + fallback.steps,
                        fallback.timeout)


def compare_hinted(numbers: Iterable[int], hints: Sequence[int], step_budget: int,
                   trial_bound: Optional[int] = None) -> pd.DataFrame:
    """Paired baseline/hinted runs at the same budget"""
    rows = []
    for n in numbers:
        baseline = factor_budgeted(n, step_budget, trial_bound)
        hinted = factor_hinted(n, hints, step_budget, trial_bound)
        rows.append({
            "n": n,
            "baseline_steps": baseline.steps,
            "baseline_ok": baseline.complete,
            "hinted_steps": hinted.steps,
            "hinted_ok": hinted.complete,
        })
    return pd.DataFrame(rows, columns=["n", "baseline_steps", "baseline_ok", "hinted_steps", "hinted_ok"])


def hard_semiprimes(hard: HardPrimeList, partners: Sequence[int], seed: int, count: int) -> List[int]:
    """Seeded semiprimes p*q with p from the flagged list"""
    if not hard.primes or not partners:
        raise EmptyRangeError("need flagged primes and partners to build semiprimes")
    rng = random.Random(seed)
    return [rng.choice(hard.primes) * rng.choice(list(partners)) for _ in range(count)]
