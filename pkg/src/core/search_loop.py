#!/usr/bin/env python3
"""
Stateful candidate search

Each step picks a (program, hint strategy) candidate with UCB1, evaluates its
current hint on the golden data in increasing input size, and folds the
result back into the state: per-size adequate solutions, a permanent tabu set
of failed (program, hint) pairs and a statistics log. All randomness of step
k comes from ``random.Random(f"{seed}:{k}")`` so a resumed checkpoint replays
exactly.
"""

import base64
import hashlib
import json
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict

from ..config.settings import settings
from .bandit import UCB1
from .enumeration import EnumerationCursor, OperandBounds, advance, position_alphabet, program_at, tape_bounds
from .errors import InputError, MemoryBudgetError, SearchExhaustedError
from .problem import GoldenDatum, ProblemStatement, group_goldens
from .vm import Bytecode, Hint, Opcode, RunStatus, digest, format_program, parse_program, run

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class HintStrategy(Enum):
    NONE = "none"
    EXHAUSTIVE = "exhaustive"
    INDUCTIVE = "inductive"
    MUTATION = "mutation"


@dataclass
class CandidateStats:
    pulls: int = 0
    successes: int = 0
    total_fuel: int = 0
    sensitivity: Fraction = Fraction(0)
    specificity: Fraction = Fraction(0)


@dataclass
class Candidate:
    id: int
    program: Bytecode
    strategy: HintStrategy
    hint: Hint = field(default_factory=Hint)
    hint_counter: int = 0
    stats: CandidateStats = field(default_factory=CandidateStats)


@dataclass(frozen=True)
class InputOutcome:
    input: str
    status: RunStatus
    output: Optional[str]
    fuel_used: int
    correct: bool
    expected: Optional[str] = None
    summary: Optional[Dict[str, Any]] = None


@dataclass(frozen=True)
class EvalRecord:
    candidate_id: int
    outcomes: Tuple[InputOutcome, ...]
    total_fuel: int
    true_positives: int = 0
    true_negatives: int = 0
    false_positives: int = 0
    false_negatives: int = 0

    @property
    def correct(self) -> int:
        return sum(1 for o in self.outcomes if o.correct)

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.correct, len(self.outcomes)) if self.outcomes else Fraction(0)

    @property
    def sensitivity(self) -> Fraction:
        positives = self.true_positives + self.false_negatives
        return Fraction(self.true_positives, positives) if positives else Fraction(1)

    @property
    def specificity(self) -> Fraction:
        negatives = self.true_negatives + self.false_positives
        return Fraction(self.true_negatives, negatives) if negatives else Fraction(1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "candidate": self.candidate_id,
            "inputs": len(self.outcomes),
            "correct": self.correct,
            "total_fuel": self.total_fuel,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "sensitivity": str(self.sensitivity),
            "specificity": str(self.specificity),
        }


def _decision_expectation(goldens: Sequence[GoldenDatum]) -> Optional[str]:
    for datum in goldens:
        if datum.kind.value == "exact" and datum.value in ("0", "1"):
            return datum.value
    return None


def evaluate(candidate: Candidate, goldens: Sequence[GoldenDatum], fuel_cap: int,
             snapshot_every: int = 0, input_width: Optional[int] = None) -> EvalRecord:
    """Run the candidate's current hint on every golden input, smallest inputs first

    The tape width is at least the longest golden input.
    """
    outcomes = []
    counts = Counter()
    total_fuel = 0
    grouped = group_goldens(goldens)
    longest = max((len(bits) for bits in grouped), default=0)
    input_width = longest if input_width is None else max(input_width, longest)
    for bits, data in grouped.items():
        outcome = run(candidate.program, candidate.hint, bits, fuel_cap, snapshot_every=snapshot_every,
                      input_width=input_width)
        correct = outcome.halted and all(datum.holds(outcome.output) for datum in data)
        expected = _decision_expectation(data)
        if expected is not None:
            answered = outcome.output if outcome.halted else None
            if expected == "1":
                counts["tp" if answered == "1" else "fn"] += 1
            else:
                counts["tn" if answered == "0" else "fp"] += 1
        total_fuel += outcome.fuel_used
        summary = digest(outcome).to_dict() if snapshot_every else None
        outcomes.append(InputOutcome(bits, outcome.status, outcome.output, outcome.fuel_used,
                                     correct, expected, summary))
    return EvalRecord(candidate.id, tuple(outcomes), total_fuel,
                      true_positives=counts["tp"], true_negatives=counts["tn"],
                      false_positives=counts["fp"], false_negatives=counts["fn"])


def reward(record: EvalRecord, fuel_cap: int) -> float:
    """accuracy * (1 - mean fuel / fuel cap)"""
    if not record.outcomes:
        return 0.0
    mean_fuel = record.total_fuel / len(record.outcomes)
    return float(record.accuracy) * (1.0 - mean_fuel / fuel_cap)


def pair_digest(program: Bytecode, hint: Hint) -> str:
    hasher = hashlib.blake2b(digest_size=16)
    hasher.update(format_program(program).encode("ascii"))
    hasher.update(b"|")
    hasher.update(hint.data)
    return hasher.hexdigest()


# Hint strategies

def exhaustive_hint(counter: int, hint_max_bytes: int) -> Optional[Hint]:
    """The counter-th hint in (length, value) order, None past the cap"""
    for length in range(hint_max_bytes + 1):
        size = 1 << (8 * length)
        if counter < size:
            return Hint.from_int(counter, length)
        counter -= size
    return None


def inductive_hint(base: Hint, counter: int, hint_max_bytes: int) -> Optional[Hint]:
    """``base`` extended by one byte; the counter picks the byte"""
    if counter > 255 or base.size + 1 > hint_max_bytes:
        return None
    return Hint(base.data + bytes([counter]))


def mutate_hint(hint: Hint, rng: random.Random, hint_max_bytes: int) -> Optional[Hint]:
    """Flip one random bit, or start a random one-byte hint from an empty one"""
    if hint.size == 0:
        return Hint(bytes([rng.randrange(256)])) if hint_max_bytes else None
    data = bytearray(hint.data)
    bit = rng.randrange(8 * len(data))
    data[bit // 8] ^= 1 << (7 - bit % 8)
    return Hint(bytes(data))


def mutate_program(code: Bytecode, rng: random.Random, bounds: OperandBounds) -> Bytecode:
    """Replace one instruction by a random symbol of that position's alphabet"""
    position = rng.randrange(len(code))
    alphabet = position_alphabet(len(code), position, bounds)
    mutated = list(code)
    mutated[position] = rng.choice(alphabet)
    return tuple(mutated)


def crossover(first: Bytecode, second: Bytecode, rng: random.Random) -> Optional[Bytecode]:
    """Prefix of one program, suffix of another of the same length"""
    if len(first) != len(second) or len(first) < 2:
        return None
    cut = rng.randrange(1, len(first))
    child = first[:cut] + second[cut:]
    return child


# Search state

@dataclass(frozen=True)
class SearchConfig:
    program_max_len: int = 4
    hint_max_bytes: int = 2
    epsilon: float = 0.1
    exploration: float = 2.0

    @classmethod
    def from_settings(cls) -> "SearchConfig":
        return cls(settings.PROGRAM_MAX_LEN, settings.HINT_MAX_BYTES,
                   settings.BANDIT_EPSILON, settings.BANDIT_EXPLORATION)


@dataclass(frozen=True)
class AdequateEntry:
    candidate_id: int
    program: Bytecode
    hint: Hint
    worst_fuel: int


@dataclass
class SearchState:
    seed: int
    config: SearchConfig = field(default_factory=SearchConfig)
    step: int = 0
    cursor: EnumerationCursor = field(default_factory=EnumerationCursor)
    enumeration_done: bool = False
    next_id: int = 0
    promising: Dict[int, Candidate] = field(default_factory=dict)
    adequate: Dict[int, AdequateEntry] = field(default_factory=dict)
    tabu: Set[str] = field(default_factory=set)
    bandit: UCB1 = field(default_factory=UCB1)
    strategy_counts: Counter = field(default_factory=Counter)
    log: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        self.bandit.exploration = self.config.exploration

    def add_candidate(self, program: Bytecode, strategy: HintStrategy, hint: Hint = Hint()) -> Optional[int]:
        """Admit a new candidate unless the pair is tabu or already promising"""
        key = pair_digest(program, hint)
        if key in self.tabu:
            return None
        for existing in self.promising.values():
            if existing.program == program and existing.hint == hint:
                return None
        candidate = Candidate(self.next_id, tuple(program), strategy, hint)
        self.promising[candidate.id] = candidate
        self.bandit.add_arm(candidate.id)
        self.next_id += 1
        return candidate.id

    def drop(self, candidate_id: int) -> None:
        self.promising.pop(candidate_id, None)
        self.bandit.remove_arm(candidate_id)


def _bounds(problem: ProblemStatement, config: SearchConfig) -> OperandBounds:
    return tape_bounds(problem.n0, 8 * config.hint_max_bytes)


def _initial_strategy(program: Bytecode, rng: random.Random) -> HintStrategy:
    if not any(op == Opcode.READ_HINT for op, _ in program):
        return HintStrategy.NONE
    return rng.choice([HintStrategy.EXHAUSTIVE, HintStrategy.INDUCTIVE])


def _fresh_from_enumerator(state: SearchState, problem: ProblemStatement, rng: random.Random) -> Optional[int]:
    bounds = _bounds(problem, state.config)
    while not state.enumeration_done:
        if state.cursor.length > state.config.program_max_len:
            state.enumeration_done = True
            break
        program = program_at(state.cursor, bounds)
        state.cursor = advance(state.cursor, bounds)
        candidate_id = state.add_candidate(program, _initial_strategy(program, rng))
        if candidate_id is not None:
            return candidate_id
    return None


def _fresh_from_mutation(state: SearchState, problem: ProblemStatement, rng: random.Random) -> Optional[int]:
    if not state.promising:
        return None
    ids = sorted(state.promising)
    parent = state.promising[rng.choice(ids)]
    bounds = _bounds(problem, state.config)
    child = None
    if len(ids) > 1 and rng.random() < 0.5:
        other = state.promising[rng.choice(ids)]
        child = crossover(parent.program, other.program, rng)
    if child is None:
        child = mutate_program(parent.program, rng, bounds)
    hint = parent.hint
    if rng.random() < 0.5:
        hint = mutate_hint(parent.hint, rng, state.config.hint_max_bytes) or parent.hint
    return state.add_candidate(child, HintStrategy.MUTATION, hint)


def select_candidate(state: SearchState, problem: ProblemStatement, rng: random.Random) -> int:
    """UCB1 over the promising set with epsilon fresh-candidate injection"""
    if not state.promising or rng.random() < state.config.epsilon:
        if state.promising and rng.random() < 0.5:
            fresh = _fresh_from_mutation(state, problem, rng)
        else:
            fresh = None
        if fresh is None:
            fresh = _fresh_from_enumerator(state, problem, rng)
        if fresh is not None:
            return fresh
        if not state.promising:
            raise SearchExhaustedError("no promising candidates left and the enumeration is exhausted")
    return state.bandit.select(state.promising)


def _next_hint(candidate: Candidate, state: SearchState, rng: random.Random) -> Optional[Hint]:
    limit = state.config.hint_max_bytes
    while True:
        candidate.hint_counter += 1
        if candidate.strategy is HintStrategy.EXHAUSTIVE:
            hint = exhaustive_hint(candidate.hint_counter, limit)
        elif candidate.strategy is HintStrategy.INDUCTIVE:
            base = max(state.adequate.items())[1].hint if state.adequate else Hint()
            hint = inductive_hint(base, candidate.hint_counter - 1, limit)
        elif candidate.strategy is HintStrategy.MUTATION:
            hint = mutate_hint(candidate.hint, rng, limit) if candidate.hint_counter <= 16 else None
        else:
            hint = None
        if hint is None:
            return None
        if pair_digest(candidate.program, hint) not in state.tabu:
            return hint


def _passes(problem: ProblemStatement, outcomes: Sequence[InputOutcome]) -> bool:
    decision = [o for o in outcomes if o.expected is not None]
    other = [o for o in outcomes if o.expected is None]
    tp = sum(1 for o in decision if o.expected == "1" and o.correct)
    fn = sum(1 for o in decision if o.expected == "1" and not o.correct)
    tn = sum(1 for o in decision if o.expected == "0" and o.correct)
    fp = sum(1 for o in decision if o.expected == "0" and not o.correct)
    sensitivity = Fraction(tp, tp + fn) if tp + fn else Fraction(1)
    specificity = Fraction(tn, tn + fp) if tn + fp else Fraction(1)
    if sensitivity < problem.sensitivity or specificity < problem.specificity:
        return False
    if other:
        required = min(problem.sensitivity, problem.specificity)
        if Fraction(sum(1 for o in other if o.correct), len(other)) < required:
            return False
    return True


def search_step(state: SearchState, problem: ProblemStatement, goldens: Sequence[GoldenDatum],
                fuel_cap: int, seed: Optional[int] = None, snapshot_every: int = 0) -> SearchState:
    """One select / materialize / evaluate / fold cycle"""
    if not goldens:
        raise InputError("search_step needs golden data")
    seed = state.seed if seed is None else seed
    rng = random.Random(f"{seed}:{state.step}")
    candidate_id = select_candidate(state, problem, rng)
    candidate = state.promising[candidate_id]
    record = evaluate(candidate, goldens, fuel_cap, snapshot_every, input_width=problem.n0)
    gained = reward(record, fuel_cap)

    state.bandit.update(candidate_id, gained)
    stats = candidate.stats
    stats.pulls += 1
    stats.total_fuel += record.total_fuel
    stats.sensitivity = record.sensitivity
    stats.specificity = record.specificity
    if record.correct == len(record.outcomes):
        stats.successes += 1

    admitted = []
    sizes = sorted({len(o.input) for o in record.outcomes})
    for size in sizes:
        prefix = [o for o in record.outcomes if len(o.input) <= size]
        if not _passes(problem, prefix):
            break
        if size not in state.adequate:
            worst = max(o.fuel_used for o in prefix)
            state.adequate[size] = AdequateEntry(candidate_id, candidate.program, candidate.hint, worst)
            state.strategy_counts[candidate.strategy.value] += 1
            admitted.append(size)

    failed = not _passes(problem, record.outcomes)
    if failed:
        state.tabu.add(pair_digest(candidate.program, candidate.hint))
        hint = _next_hint(candidate, state, rng)
        if hint is None:
            state.drop(candidate_id)
        else:
            candidate.hint = hint

    state.log.append({
        "step": state.step,
        "candidate": candidate_id,
        "strategy": candidate.strategy.value,
        "correct": record.correct,
        "inputs": len(record.outcomes),
        "fuel": record.total_fuel,
        "reward": gained,
        "adequate": admitted,
        "tabu": failed,
    })
    logger.debug("Step %d: candidate %d scored %d/%d (reward %.4f)", state.step, candidate_id,
                 record.correct, len(record.outcomes), gained)
    state.step += 1
    return state


def run_search(problem: ProblemStatement, goldens: Sequence[GoldenDatum], steps: int, fuel_cap: int,
               state: Optional[SearchState] = None, seed: int = 0,
               config: Optional[SearchConfig] = None, stop_when_adequate: bool = True) -> SearchState:
    """Repeat search_step until ``steps`` steps ran or the largest golden size is covered"""
    state = state or SearchState(seed=seed, config=config or SearchConfig.from_settings())
    top = max(len(d.input) for d in goldens)
    while state.step < steps:
        if stop_when_adequate and top in state.adequate:
            break
        try:
            search_step(state, problem, goldens, fuel_cap)
        except SearchExhaustedError:
            logger.info("Search space exhausted after %d steps", state.step)
            break
    return state


# Checkpoints

class CandidateRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    program: str
    strategy: str
    hint: str
    hint_counter: int
    pulls: int
    successes: int
    total_fuel: int
    sensitivity: str
    specificity: str


class AdequateRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    size: int
    candidate_id: int
    program: str
    hint: str
    worst_fuel: int


class SearchCheckpoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: int = CHECKPOINT_VERSION
    problem: str
    seed: int
    step: int
    program_max_len: int
    hint_max_bytes: int
    epsilon: float
    exploration: float
    cursor: Dict[str, int]
    enumeration_done: bool
    next_id: int
    candidates: List[CandidateRecord]
    adequate: List[AdequateRecord]
    tabu: List[str]
    bandit: Dict[str, Dict[str, float]]
    strategy_counts: Dict[str, int]
    log: List[Dict[str, Any]]


def _b64(hint: Hint) -> str:
    return base64.b64encode(hint.data).decode("ascii")


def _unb64(text: str) -> Hint:
    return Hint(base64.b64decode(text.encode("ascii")))


def to_checkpoint(state: SearchState, problem_name: str) -> SearchCheckpoint:
    return SearchCheckpoint(
        problem=problem_name,
        seed=state.seed,
        step=state.step,
        program_max_len=state.config.program_max_len,
        hint_max_bytes=state.config.hint_max_bytes,
        epsilon=state.config.epsilon,
        exploration=state.config.exploration,
        cursor=state.cursor.to_dict(),
        enumeration_done=state.enumeration_done,
        next_id=state.next_id,
        candidates=[
            CandidateRecord(
                id=c.id, program=format_program(c.program), strategy=c.strategy.value, hint=_b64(c.hint),
                hint_counter=c.hint_counter, pulls=c.stats.pulls, successes=c.stats.successes,
                total_fuel=c.stats.total_fuel, sensitivity=str(c.stats.sensitivity),
                specificity=str(c.stats.specificity),
            )
            for _, c in sorted(state.promising.items())
        ],
        adequate=[
            AdequateRecord(size=size, candidate_id=e.candidate_id, program=format_program(e.program),
                           hint=_b64(e.hint), worst_fuel=e.worst_fuel)
            for size, e in sorted(state.adequate.items())
        ],
        tabu=sorted(state.tabu),
        bandit=state.bandit.to_dict(),
        strategy_counts=dict(sorted(state.strategy_counts.items())),
        log=state.log,
    )


def from_checkpoint(checkpoint: SearchCheckpoint) -> SearchState:
    if checkpoint.format_version != CHECKPOINT_VERSION:
        raise InputError(f"unsupported checkpoint version {checkpoint.format_version}")
    config = SearchConfig(checkpoint.program_max_len, checkpoint.hint_max_bytes,
                          checkpoint.epsilon, checkpoint.exploration)
    state = SearchState(
        seed=checkpoint.seed,
        config=config,
        step=checkpoint.step,
        cursor=EnumerationCursor.from_dict(checkpoint.cursor),
        enumeration_done=checkpoint.enumeration_done,
        next_id=checkpoint.next_id,
        tabu=set(checkpoint.tabu),
        bandit=UCB1.from_dict(checkpoint.bandit, exploration=checkpoint.exploration),
        strategy_counts=Counter(checkpoint.strategy_counts),
        log=list(checkpoint.log),
    )
    for record in checkpoint.candidates:
        stats = CandidateStats(record.pulls, record.successes, record.total_fuel,
                               Fraction(record.sensitivity), Fraction(record.specificity))
        state.promising[record.id] = Candidate(record.id, parse_program(record.program),
                                               HintStrategy(record.strategy), _unb64(record.hint),
                                               record.hint_counter, stats)
    for record in checkpoint.adequate:
        state.adequate[record.size] = AdequateEntry(record.candidate_id, parse_program(record.program),
                                                    _unb64(record.hint), record.worst_fuel)
    return state


def checkpoint_bytes(state: SearchState, problem_name: str, max_bytes: Optional[int] = None) -> bytes:
    """Canonical JSON: sorted keys, fixed separators, trailing newline"""
    payload = to_checkpoint(state, problem_name).model_dump(mode="json")
    blob = (json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")
    limit = settings.CHECKPOINT_MAX_BYTES if max_bytes is None else max_bytes
    if len(blob) > limit:
        raise MemoryBudgetError(f"checkpoint of {len(blob)} bytes exceeds the cap of {limit}")
    return blob


def save_checkpoint(state: SearchState, problem_name: str, path: Path, max_bytes: Optional[int] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(state, problem_name, max_bytes))
    logger.info("Checkpoint written to %s at step %d", path, state.step)
    return path


def load_checkpoint(path: Path) -> Tuple[SearchState, str]:
    checkpoint = SearchCheckpoint.model_validate_json(Path(path).read_text(encoding="utf-8"))
    return from_checkpoint(checkpoint), checkpoint.problem
