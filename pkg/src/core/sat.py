#!/usr/bin/env python3
"""
3CNF-SAT pack: instances, verifier, baseline DPLL, generators and hardness statistics
"""

import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import FiniteKitError, SatInputError
from ..utils.dimacs import parse_dimacs, format_dimacs

logger = logging.getLogger(__name__)

Clause = Tuple[int, int, int]
HEADER_BITS = 8

# Clause densities outside this band are the easy regimes
EASY_RATIO_BAND = (2.0, 5.0)
HARD_RATIO = 4.26


@dataclass(frozen=True)
class Cnf3Instance:
    n: int
    clauses: Tuple[Clause, ...]
    planted: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        clauses = tuple(tuple(int(lit) for lit in clause) for clause in self.clauses)
        if self.n < 0:
            raise SatInputError("variable count must be non-negative")
        for number, clause in enumerate(clauses):
            if len(clause) != 3:
                raise SatInputError(f"clause {number} has {len(clause)} literals, expected 3")
            for lit in clause:
                if lit == 0 or abs(lit) > self.n:
                    raise SatInputError(f"clause {number}: literal {lit} outside 1..{self.n}")
                if -lit in clause:
                    raise SatInputError(f"clause {number} contains x{abs(lit)} and its negation")
        object.__setattr__(self, "clauses", clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def ratio(self) -> float:
        return self.m / self.n if self.n else 0.0


@dataclass(frozen=True)
class Assignment:
    bits: Tuple[int, ...]

    @classmethod
    def from_string(cls, text: str) -> "Assignment":
        return cls(tuple(1 if ch == "1" else 0 for ch in text))

    @classmethod
    def from_int(cls, value: int, n: int) -> "Assignment":
        return cls(tuple((value >> (n - 1 - i)) & 1 for i in range(n)))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def value(self, literal: int) -> bool:
        bit = self.bits[abs(literal) - 1]
        return bool(bit) if literal > 0 else not bit


def sat_verify(instance: Cnf3Instance, assignment: Assignment) -> bool:
    """Every clause has a satisfied literal"""
    if len(assignment.bits) != instance.n:
        raise SatInputError(f"assignment has {len(assignment.bits)} bits for {instance.n} variables")
    return all(any(assignment.value(lit) for lit in clause) for clause in instance.clauses)


def sat_truth_table(instance: Cnf3Instance) -> Optional[Assignment]:
    """First satisfying assignment in numeric order, by brute force"""
    for value in range(1 << instance.n):
        assignment = Assignment.from_int(value, instance.n)
        if sat_verify(instance, assignment):
            return assignment
    return None


# Baseline solver

class Verdict(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SatResult:
    verdict: Verdict
    assignment: Optional[Assignment]
    steps: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "verdict": self.verdict.value,
            "assignment": str(self.assignment) if self.assignment else None,
            "steps": self.steps,
        }


class _Timeout(Exception):
    pass


class _Dpll:
    def __init__(self, instance: Cnf3Instance, budget: Optional[int]):
        self.instance = instance
        self.budget = budget
        self.steps = 0

    def charge(self):
        self.steps += 1
        if self.budget is not None and self.steps > self.budget:
            raise _Timeout()

    def propagate(self, assign: Dict[int, bool]) -> bool:
        """Unit propagation; False on conflict"""
        changed = True
        while changed:
            changed = False
            for clause in self.instance.clauses:
                open_literals = []
                satisfied = False
                for lit in clause:
                    var = abs(lit)
                    if var in assign:
                        if assign[var] == (lit > 0):
                            satisfied = True
                            break
                    elif lit not in open_literals:
                        open_literals.append(lit)
                if satisfied:
                    continue
                if not open_literals:
                    return False
                if len(open_literals) == 1:
                    lit = open_literals[0]
                    self.charge()
                    assign[abs(lit)] = lit > 0
                    changed = True
        return True

    def all_satisfied(self, assign: Dict[int, bool]) -> bool:
        return all(any(abs(lit) in assign and assign[abs(lit)] == (lit > 0) for lit in clause)
                   for clause in self.instance.clauses)

    def solve(self, assign: Dict[int, bool]) -> Optional[Dict[int, bool]]:
        if not self.propagate(assign):
            return None
        if self.all_satisfied(assign):
            return assign
        var = next(v for v in range(1, self.instance.n + 1) if v not in assign)
        for value in (True, False):
            self.charge()
            branch = dict(assign)
            branch[var] = value
            found = self.solve(branch)
            if found is not None:
                return found
        return None


def sat_decide_baseline(instance: Cnf3Instance, step_budget: Optional[int] = None) -> SatResult:
    """DPLL with unit propagation; steps are decisions plus propagations

    Branches on the lowest unassigned variable, true first. Unassigned
    variables of a satisfying partial assignment are reported false.
    """
    solver = _Dpll(instance, step_budget)
    try:
        model = solver.solve({})
    except _Timeout:
        return SatResult(Verdict.TIMEOUT, None, solver.steps - 1)
    if model is None:
        return SatResult(Verdict.UNSAT, None, solver.steps)
    assignment = Assignment(tuple(1 if model.get(v, False) else 0 for v in range(1, instance.n + 1)))
    if not sat_verify(instance, assignment):
        raise FiniteKitError("DPLL produced a non-satisfying assignment")
    return SatResult(Verdict.SAT, assignment, solver.steps)


# Generators

class GeneratorMode(Enum):
    UNIFORM = "uniform"
    PLANTED = "planted"
    SUBSET = "subset"


def _random_clause(rng: random.Random, n: int) -> Clause:
    variables = rng.sample(range(1, n + 1), 3)
    return tuple(v if rng.random() < 0.5 else -v for v in variables)


def sat_generate(n: int, m: int, seed: int, mode: GeneratorMode = GeneratorMode.UNIFORM,
                 mother: Optional[Cnf3Instance] = None) -> Cnf3Instance:
    """Seeded instance generator

    uniform: m distinct random clauses over 3 distinct variables each;
    planted: the same, restricted to clauses a hidden assignment satisfies;
    subset: m clauses of ``mother`` in their original order.
    """
    rng = random.Random(seed)
    if mode is GeneratorMode.SUBSET:
        if mother is None:
            raise SatInputError("subset mode needs a mother instance")
        if not 0 <= m <= mother.m:
            raise SatInputError(f"cannot pick {m} clauses from a mother of {mother.m}")
        chosen = sorted(rng.sample(range(mother.m), m))
        return Cnf3Instance(mother.n, tuple(mother.clauses[i] for i in chosen), planted=mother.planted)

    if n < 3:
        raise SatInputError("3CNF instances need at least 3 variables")
    distinct = 8 * math.comb(n, 3)
    hidden = None
    if mode is GeneratorMode.PLANTED:
        hidden = tuple(rng.randrange(2) for _ in range(n))
        distinct = 7 * math.comb(n, 3)
    if m > distinct:
        raise SatInputError(f"only {distinct} distinct clauses exist over {n} variables")
    seen = set()
    clauses = []
    while len(clauses) < m:
        clause = _random_clause(rng, n)
        key = tuple(sorted(clause))
        if key in seen:
            continue
        if hidden is not None and not any((hidden[abs(l) - 1] == 1) == (l > 0) for l in clause):
            continue
        seen.add(key)
        clauses.append(clause)
    return Cnf3Instance(n, tuple(clauses), planted=hidden)


def sat_is_decomposable(instance: Cnf3Instance) -> bool:
    """True when some variable is unused or the interaction graph is disconnected"""
    if instance.n == 0:
        return False
    neighbours: Dict[int, set] = {v: set() for v in range(1, instance.n + 1)}
    for clause in instance.clauses:
        variables = {abs(lit) for lit in clause}
        for v in variables:
            neighbours[v] |= variables - {v}
    used = {abs(lit) for clause in instance.clauses for lit in clause}
    if len(used) < instance.n:
        return True
    seen = {1}
    queue = deque([1])
    while queue:
        for w in neighbours[queue.popleft()]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) < instance.n


def sat_universe_size(n: int) -> int:
    """C(4n(n-1)(n-2)/6, 4n) * 2^(4n)"""
    if n < 3:
        raise SatInputError("universe size needs n >= 3")
    triples = 4 * n * (n - 1) * (n - 2) // 6
    return math.comb(triples, 4 * n) * (1 << (4 * n))


# Bit-string codec

def _index_bits(n: int) -> int:
    return max(1, (n - 1).bit_length())


def sat_encode(instance: Cnf3Instance) -> str:
    """8-bit n, 8-bit clause count, then sign bit + (var-1) index bits per literal"""
    if instance.n > 255 or instance.m > 255:
        raise SatInputError("encoding supports at most 255 variables and 255 clauses")
    width = _index_bits(instance.n)
    parts = [format(instance.n, "08b"), format(instance.m, "08b")]
    for clause in instance.clauses:
        for lit in clause:
            parts.append(("1" if lit < 0 else "0") + format(abs(lit) - 1, f"0{width}b"))
    return "".join(parts)


def sat_decode(bits: str) -> Cnf3Instance:
    if len(bits) < 2 * HEADER_BITS:
        raise SatInputError("encoding shorter than its header")
    n = int(bits[:8], 2)
    m = int(bits[8:16], 2)
    width = _index_bits(n)
    literal_bits = 1 + width
    if len(bits) != 16 + 3 * m * literal_bits:
        raise SatInputError(f"encoding length {len(bits)} does not match n={n}, m={m}")
    clauses = []
    pos = 16
    for _ in range(m):
        clause = []
        for _ in range(3):
            sign = bits[pos]
            var = int(bits[pos + 1:pos + literal_bits], 2) + 1
            clause.append(-var if sign == "1" else var)
            pos += literal_bits
        clauses.append(tuple(clause))
    return Cnf3Instance(n, tuple(clauses))


def to_dimacs(instance: Cnf3Instance, comment: str = "") -> str:
    return format_dimacs(instance.n, [list(c) for c in instance.clauses], comments=[comment] if comment else [])


def from_dimacs(text: str) -> Cnf3Instance:
    n, clauses = parse_dimacs(text)
    return Cnf3Instance(n, tuple(tuple(c) for c in clauses))


# Subset-of-mother selections

def select_clauses(mother: Cnf3Instance, selector: str) -> Cnf3Instance:
    """Bit i of ``selector`` keeps clause i of the mother"""
    if len(selector) > mother.m:
        raise SatInputError(f"selector of {len(selector)} bits for {mother.m} clauses")
    kept = tuple(mother.clauses[i] for i, bit in enumerate(selector) if bit == "1")
    return Cnf3Instance(mother.n, kept)


# Hardness statistics

def sat_hardness_profile(instances: Sequence[Cnf3Instance], step_budget: int,
                         exclude_decomposable: bool = False) -> pd.DataFrame:
    """Per-instance baseline cost and features; plain counts only"""
    rows = []
    for index, instance in enumerate(instances):
        decomposable = sat_is_decomposable(instance)
        if exclude_decomposable and decomposable:
            continue
        result = sat_decide_baseline(instance, step_budget)
        rows.append({
            "index": index,
            "n": instance.n,
            "m": instance.m,
            "ratio": round(instance.ratio, 6),
            "steps": result.steps,
            "timeout": result.verdict is Verdict.TIMEOUT,
            "verdict": result.verdict.value,
            "decomposable": decomposable,
            "planted": instance.planted is not None,
            "easy_band": not EASY_RATIO_BAND[0] <= instance.ratio <= EASY_RATIO_BAND[1],
        })
    columns = ["index", "n", "m", "ratio", "steps", "timeout", "verdict", "decomposable", "planted", "easy_band"]
    return pd.DataFrame(rows, columns=columns)


def hardness_summary(profile: pd.DataFrame) -> pd.DataFrame:
    """Instance count, median steps and timeouts per (planted, decomposable) group"""
    if profile.empty:
        return pd.DataFrame(columns=["planted", "decomposable", "instances", "median_steps", "timeouts"])
    grouped = profile.groupby(["planted", "decomposable"])
    return grouped.agg(
        instances=("steps", "size"),
        median_steps=("steps", "median"),
        timeouts=("timeout", "sum"),
    ).reset_index()


def incremental_hardness(ns: Iterable[int], ratio: float, seeds: Iterable[int], step_budget: int,
                         hard_steps: Optional[int] = None) -> pd.DataFrame:
    """Share of hard uniform instances per n and how many more appear than at the previous n

    An instance is hard when the baseline times out or needs at least
    ``hard_steps`` steps.
    """
    seeds = list(seeds)
    rows = []
    for n in ns:
        m = max(1, round(ratio * n))
        steps = []
        hard = 0
        for seed in seeds:
            result = sat_decide_baseline(sat_generate(n, m, seed), step_budget)
            steps.append(result.steps)
            if result.verdict is Verdict.TIMEOUT or (hard_steps is not None and result.steps >= hard_steps):
                hard += 1
        rows.append({
            "n": n,
            "m": m,
            "instances": len(seeds),
            "hard": hard,
            "hard_fraction": hard / len(seeds) if seeds else 0.0,
            "median_steps": float(np.median(steps)) if steps else 0.0,
        })
    frame = pd.DataFrame(rows, columns=["n", "m", "instances", "hard", "hard_fraction", "median_steps"])
    frame["additional_hard"] = frame["hard"].diff().fillna(frame["hard"]).astype(int)
    return frame
