#!/usr/bin/env python3
"""
Problem statements, golden data and hinted solvers

A ProblemStatement fixes everything a search needs to know about a problem
at one maximum input size n0: the verifier, the input universe, the output
width, the accuracy that counts as adequate and the verifiability regimes.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import InconsistentProblemError, InputError
from .traces import GrowthFormula
from .vm import Bytecode, Hint, RunStatus, format_program, run

logger = logging.getLogger(__name__)

Verifier = Callable[[str, str], bool]
UniversePredicate = Callable[[str], bool]


def all_bit_strings(bits: str) -> bool:
    return True


def non_empty(bits: str) -> bool:
    return len(bits) > 0


def bit_strings(length: int) -> Iterator[str]:
    """All strings of exactly ``length`` bits in increasing numeric order"""
    if length == 0:
        yield ""
        return
    for value in range(1 << length):
        yield format(value, f"0{length}b")


class MachineKind(Enum):
    """Machine model the problem is stated for; only classical is supported"""
    CLASSICAL = "classical"


class GoldenKind(Enum):
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class GoldenDatum:
    """A pre-verified fact about one input

    EXACT carries the output bit string; LOWER/UPPER carry an integer bound
    on the output read as a big-endian number.
    """
    input: str
    kind: GoldenKind
    value: Union[str, int]

    def holds(self, output: Optional[str]) -> bool:
        if output is None:
            return False
        if self.kind is GoldenKind.EXACT:
            return output == self.value
        if not output:
            return False
        number = int(output, 2)
        if self.kind is GoldenKind.LOWER:
            return number >= int(self.value)
        return number <= int(self.value)

    def to_dict(self) -> Dict[str, object]:
        return {"input": self.input, "kind": self.kind.value, "value": self.value}


def group_goldens(goldens: Sequence[GoldenDatum]) -> Dict[str, List[GoldenDatum]]:
    """Goldens keyed by input, inputs ordered by (length, value)"""
    grouped: Dict[str, List[GoldenDatum]] = {}
    for datum in sorted(goldens, key=lambda d: (len(d.input), d.input)):
        grouped.setdefault(datum.input, []).append(datum)
    return grouped


@dataclass(frozen=True)
class VerifiabilityThresholds:
    """Input-size regimes: all precomputable (v1), any solvable (v2),
    many solvable (v3), some solvable (v4)"""
    v1: int
    v2: int
    v3: int
    v4: int

    def __post_init__(self):
        if not 0 <= self.v1 <= self.v2 <= self.v3 <= self.v4:
            raise InputError(
                f"verifiability thresholds must satisfy 0 <= v1 <= v2 <= v3 <= v4, got "
                f"{self.v1}, {self.v2}, {self.v3}, {self.v4}"
            )

    def to_dict(self) -> Dict[str, int]:
        return dataclasses.asdict(self)


def _fraction_in_unit(value, name: str) -> Fraction:
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise InputError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class ProblemStatement:
    """A computational problem restricted to inputs of at most n0 bits"""
    name: str
    verifier: Verifier
    n0: int
    universe: UniversePredicate = all_bit_strings
    output_size: GrowthFormula = field(default_factory=lambda: GrowthFormula.const(1))
    sensitivity: Fraction = Fraction(1)
    specificity: Fraction = Fraction(1)
    requires_proof: bool = False
    complete: bool = True
    machine: MachineKind = MachineKind.CLASSICAL
    algorithm_size: GrowthFormula = field(default_factory=lambda: GrowthFormula.const(20000))
    thresholds: Optional[VerifiabilityThresholds] = None
    goldens: Tuple[GoldenDatum, ...] = ()
    resize: Optional[Callable[[int], "ProblemStatement"]] = field(default=None, compare=False, repr=False)
    description: str = ""

    def __post_init__(self):
        if self.n0 < 0:
            raise InputError("n0 must be non-negative")
        object.__setattr__(self, "sensitivity", _fraction_in_unit(self.sensitivity, "sensitivity"))
        object.__setattr__(self, "specificity", _fraction_in_unit(self.specificity, "specificity"))
        if self.machine is not MachineKind.CLASSICAL:
            raise InputError("only classical machines are supported")
        if self.requires_proof:
            raise InputError("proof-carrying outputs are not supported")

    def at_size(self, n0: int) -> "ProblemStatement":
        """The same problem re-targeted to maximum size n0"""
        if self.resize is not None:
            return self.resize(n0)
        return dataclasses.replace(self, n0=n0, goldens=())

    @property
    def output_bits(self) -> int:
        return max(1, math.ceil(self.output_size.evaluate(max(self.n0, 1))))

    @property
    def is_decision(self) -> bool:
        return self.output_bits == 1

    def universe_bound(self) -> int:
        """Upper bound on the universe size: every string of at most n0 bits"""
        return (1 << (self.n0 + 1)) - 1

    def inputs(self, max_size: Optional[int] = None) -> List[str]:
        """Universe members of size <= n0, ordered by (length, value)"""
        top = self.n0 if max_size is None else max_size
        return [bits for length in range(top + 1) for bits in bit_strings(length) if self.universe(bits)]

    def outputs(self) -> Iterator[str]:
        return bit_strings(self.output_bits)

    def accepted_outputs(self, input_bits: str) -> List[str]:
        return [out for out in self.outputs() if self.verifier(input_bits, out)]

    def first_output(self, input_bits: str) -> str:
        """Smallest accepted output; raises when the verifier rejects them all"""
        for out in self.outputs():
            if self.verifier(input_bits, out):
                return out
        raise InconsistentProblemError(self.name, input_bits)


def goldens_from_oracle(problem: ProblemStatement, sizes: Optional[Sequence[int]] = None) -> List[GoldenDatum]:
    """Exact goldens for every universe input, answers found by output enumeration"""
    wanted = set(sizes) if sizes is not None else None
    goldens = []
    for bits in problem.inputs():
        if wanted is not None and len(bits) not in wanted:
            continue
        goldens.append(GoldenDatum(bits, GoldenKind.EXACT, problem.first_output(bits)))
    logger.debug("Generated %d goldens for %s", len(goldens), problem.name)
    return goldens


class SolverKind(Enum):
    BYTECODE = "bytecode"
    LOOKUP = "lookup"


@dataclass(frozen=True)
class SolveOutcome:
    status: RunStatus
    output: Optional[str]
    fuel_used: int

    @property
    def halted(self) -> bool:
        return self.status is RunStatus.HALTED


@dataclass(frozen=True)
class HintedProgram:
    """The fixed part of a hinted algorithm

    Either VM bytecode or the built-in table lookup procedure; the hint is
    supplied separately per size.
    """
    kind: SolverKind
    code: Optional[Bytecode] = None

    @classmethod
    def bytecode(cls, code: Bytecode) -> "HintedProgram":
        return cls(SolverKind.BYTECODE, tuple(code))

    @classmethod
    def lookup(cls) -> "HintedProgram":
        return cls(SolverKind.LOOKUP)

    def solve(self, hint: Hint, input_bits: str, fuel: int, input_width: Optional[int] = None) -> SolveOutcome:
        if self.kind is SolverKind.BYTECODE:
            outcome = run(self.code, hint, input_bits, fuel, input_width=input_width)
            return SolveOutcome(outcome.status, outcome.output, outcome.fuel_used)
        from .lookup import LookupSolver

        output, probes = LookupSolver(hint).query(input_bits)
        if probes > fuel:
            return SolveOutcome(RunStatus.FUEL_EXHAUSTED, None, fuel)
        return SolveOutcome(RunStatus.HALTED, output, probes)

    def text(self) -> str:
        if self.kind is SolverKind.LOOKUP:
            return "# table lookup (binary search over the hint)\n"
        return format_program(self.code)

    def identity(self) -> str:
        return self.kind.value if self.kind is SolverKind.LOOKUP else format_program(self.code)


def estimate_thresholds(problem: ProblemStatement, solve: Callable[[str], Tuple[Optional[str], int]],
                        fuel: int, precompute_budget: int, many: float = 0.5) -> VerifiabilityThresholds:
    """Estimate v1..v4 from a reference solver's per-input cost

    ``solve`` returns (output, cost). Sizes are scanned upward from 1 and each
    threshold is the last size for which its condition held at every smaller
    size: v4 some input solved within ``fuel``, v3 at least ``many`` of them,
    v2 all of them, v1 all of them with the cumulative cost inside
    ``precompute_budget``.
    """
    v = [0, 0, 0, 0]
    alive = [True, True, True, True]
    total_cost = 0
    for size in range(1, problem.n0 + 1):
        members = [bits for bits in bit_strings(size) if problem.universe(bits)]
        if not members:
            continue
        solved = 0
        for bits in members:
            output, cost = solve(bits)
            total_cost += cost
            if output is not None and cost <= fuel and problem.verifier(bits, output):
                solved += 1
        share = solved / len(members)
        conditions = [
            share == 1 and total_cost <= precompute_budget,
            share == 1,
            share >= many,
            solved > 0,
        ]
        for i, ok in enumerate(conditions):
            alive[i] = alive[i] and ok
            if alive[i]:
                v[i] = size
        if not any(alive):
            break
    for i in range(1, 4):
        v[i] = max(v[i], v[i - 1])
    return VerifiabilityThresholds(*v)

