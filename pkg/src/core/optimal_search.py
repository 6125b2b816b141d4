#!/usr/bin/env python3
"""
Exhaustive optimal search and the doubling search built on it

``optimal_search`` walks every (program, hint) pair within the length and hint
caps and keeps the pair with the lowest worst-case fuel over all inputs of size
at most n0. Hints are visited by equivalence class: a program only observes
the hint bits it reads, so one representative per assignment of those bits
(all other bits zero, the smallest member of its class) stands for the class.

``doubling_search`` repeats the search at n_start, 2*n_start, 4*n_start, ...
and stops once the winner and the class of its fuel history have been stable
for a window of doublings.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..config.settings import settings
from .complexity import Level, classify
from .enumeration import EnumerationCursor, iter_programs, tape_bounds
from .errors import BudgetExceededError, InputError, MemoryBudgetError, TraceValidationError
from .lookup import LookupSolver, build_lookup_hint
from .problem import HintedProgram, ProblemStatement
from .traces import Range, RuntimeTrace
from .vm import Bytecode, Hint, Opcode, format_program, run

logger = logging.getLogger(__name__)

DOUBLING_NOTE = (
    "doubling-stability heuristic: the winner's class was unchanged over the window of "
    "doublings; the explosion threshold is not known, so this is evidence, not proof"
)


@dataclass(frozen=True)
class SearchWinner:
    """Best (program, hint) pair and its worst-case fuel"""
    program: HintedProgram
    hint: Hint
    worst_fuel: int
    program_index: int = 0
    hint_value: int = 0

    @property
    def rank_key(self) -> Tuple[int, int, int, int, int]:
        code_len = len(self.program.code) if self.program.code else 0
        return (self.worst_fuel, code_len, self.hint.size, self.program_index, self.hint_value)

    def identity(self) -> str:
        return f"{self.program.identity()}|{self.hint.data.hex()}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "solver": self.program.kind.value,
            "program": self.program.text(),
            "hint": self.hint.data.hex(),
            "hint_bytes": self.hint.size,
            "worst_fuel": self.worst_fuel,
        }


def hint_classes(code: Bytecode, hint_bytes: int) -> List[int]:
    """Representative hint values of ``hint_bytes`` bytes for one program, ascending"""
    total = 8 * hint_bytes
    read = sorted({arg for op, arg in code if op == Opcode.READ_HINT and arg < total})
    values = []
    for bits in itertools.product((0, 1), repeat=len(read)):
        value = 0
        for index, bit in zip(read, bits):
            if bit:
                value |= 1 << (total - 1 - index)
        values.append(value)
    return sorted(values)


class _Trials:
    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.budget


def _worst_fuel(code: Bytecode, hint: Hint, cases: Sequence[Tuple[str, frozenset]],
                width: int, fuel: int, trials: _Trials, n0: int) -> Optional[int]:
    """Worst-case fuel if the pair is correct on every case within ``fuel``"""
    worst = 0
    for bits, accepted in cases:
        if not trials.spend():
            raise _OutOfTrials()
        outcome = run(code, hint, bits, fuel, input_width=n0)
        if not outcome.halted or len(outcome.output) != width or outcome.output not in accepted:
            return None
        worst = max(worst, outcome.fuel_used)
    return worst


class _OutOfTrials(Exception):
    pass


def correctness_cases(problem: ProblemStatement, max_inputs: Optional[int] = None) -> List[Tuple[str, frozenset]]:
    """(input, accepted outputs) for every universe input, shortest first

    Refuses before enumerating anything when the universe may hold more than
    ``max_inputs`` members.
    """
    max_inputs = settings.SEARCH_MAX_INPUTS if max_inputs is None else max_inputs
    if problem.universe_bound() > max_inputs:
        raise MemoryBudgetError(
            f"{problem.name} at n0={problem.n0} has up to {problem.universe_bound()} inputs, "
            f"over the limit of {max_inputs}"
        )
    return [(bits, frozenset(problem.accepted_outputs(bits))) for bits in problem.inputs()]


def optimal_search(problem: ProblemStatement, n0: Optional[int] = None, program_max_len: Optional[int] = None,
                   hint_max_bytes: Optional[int] = None, fuel_cap: Optional[int] = None,
                   trial_budget: Optional[int] = None, start: Optional[EnumerationCursor] = None,
                   incumbent: Optional[SearchWinner] = None,
                   max_inputs: Optional[int] = None) -> Optional[SearchWinner]:
    """Fuel-optimal (program, hint) pair correct on every input of size <= n0

    Ties are broken by program length, hint length, program enumeration index
    and hint value. Returns None when no pair is correct within ``fuel_cap``.
    Running out of ``trial_budget`` (counted in program runs) raises
    BudgetExceededError carrying the best pair so far and the cursor of the
    first unfinished program; passing both back resumes the search. A
    universe larger than ``max_inputs`` raises MemoryBudgetError up front.
    """
    if n0 is not None and n0 != problem.n0:
        problem = problem.at_size(n0)
    program_max_len = settings.PROGRAM_MAX_LEN if program_max_len is None else program_max_len
    hint_max_bytes = settings.HINT_MAX_BYTES if hint_max_bytes is None else hint_max_bytes
    fuel_cap = settings.DEFAULT_FUEL if fuel_cap is None else fuel_cap
    trial_budget = settings.SEARCH_TRIAL_BUDGET if trial_budget is None else trial_budget
    if program_max_len < 1 or fuel_cap < 1 or hint_max_bytes < 0:
        raise InputError("program_max_len and fuel_cap must be positive, hint_max_bytes non-negative")

    width = problem.output_bits
    cases = correctness_cases(problem, max_inputs)
    bounds = tape_bounds(problem.n0, 8 * hint_max_bytes)
    lower_bound = 2 * width + 1
    trials = _Trials(trial_budget)
    best = incumbent

    logger.info("Optimal search for %s: n0=%d, programs <= %d, hints <= %d bytes, %d inputs",
                problem.name, problem.n0, program_max_len, hint_max_bytes, len(cases))
    for cursor, code in iter_programs(program_max_len, bounds, start):
        if best is not None and best.worst_fuel <= lower_bound:
            best_len = best.rank_key[1]
            if cursor.length > best_len or best.hint.size == 0:
                break
        try:
            for hint_bytes in range(hint_max_bytes + 1):
                for value in hint_classes(code, hint_bytes):
                    hint = Hint.from_int(value, hint_bytes)
                    fuel = fuel_cap if best is None else min(fuel_cap, best.worst_fuel)
                    worst = _worst_fuel(code, hint, cases, width, fuel, trials, problem.n0)
                    if worst is None:
                        continue
                    candidate = SearchWinner(HintedProgram.bytecode(code), hint, worst, cursor.index, value)
                    if best is None or candidate.rank_key < best.rank_key:
                        logger.debug("New best at %s: fuel %d\n%s", cursor, worst, format_program(code))
                        best = candidate
        except _OutOfTrials:
            logger.warning("Trial budget of %d exhausted at %s", trial_budget, cursor)
            raise BudgetExceededError(
                f"trial budget {trial_budget} exhausted at program length {cursor.length}, index {cursor.index}",
                best=best, cursor=cursor,
            )
    return best


def lookup_winner(problem: ProblemStatement, memory_budget: Optional[int] = None) -> SearchWinner:
    """The table-lookup solver scored like a search result (fuel = probes)"""
    hint, program = build_lookup_hint(problem, memory_budget=memory_budget)
    solver = LookupSolver(hint)
    worst = max(solver.query(bits)[1] for bits in problem.inputs())
    return SearchWinner(program, hint, worst)


@dataclass(frozen=True)
class DoublingStep:
    n: int
    winner: Optional[SearchWinner]
    level: Optional[Level]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "winner": self.winner.to_dict() if self.winner else None,
            "level": self.level.label if self.level else None,
        }


@dataclass
class DoublingResult:
    stable: bool
    history: List[DoublingStep] = field(default_factory=list)
    stop_reason: str = ""
    note: str = DOUBLING_NOTE

    @property
    def winner(self) -> Optional[SearchWinner]:
        return self.history[-1].winner if self.history else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stable": self.stable,
            "stop_reason": self.stop_reason,
            "history": [step.to_dict() for step in self.history],
            "note": self.note,
        }


def _history_level(history: List[DoublingStep], n: int, worst_fuel: int) -> Optional[Level]:
    points = [(step.n, step.winner.worst_fuel) for step in history if step.winner and step.n >= 4]
    points.append((n, worst_fuel))
    points = [(size, fuel) for size, fuel in points if size >= 4]
    if not points:
        return None
    try:
        trace = RuntimeTrace(tuple(points), label="winner fuel", sampled=True)
        return classify(trace, Range(points[0][0], points[-1][0])).level
    except TraceValidationError:
        return None


def doubling_search(problem: ProblemStatement, n_start: int, stability_window: Optional[int] = None,
                    max_doublings: Optional[int] = None, program_max_len: Optional[int] = None,
                    hint_max_bytes: int = 0, fuel_cap: Optional[int] = None,
                    trial_budget: Optional[int] = None, memory_budget: Optional[int] = None,
                    max_inputs: Optional[int] = None) -> DoublingResult:
    """Optimal search at repeatedly doubled sizes until the winner settles

    At every size the VM optimum wins; when the VM space has no correct pair
    the table-lookup solver stands in. A step counts towards the window when
    the winner runs the same program as before (for the lookup procedure the
    table itself may differ between sizes) and the class of the
    winners' fuel history is unchanged. A size whose universe or lookup table
    is over budget ends the run with the history so far.
    """
    if n_start < 2:
        raise InputError("n_start must be at least 2")
    window = settings.DOUBLING_WINDOW if stability_window is None else stability_window
    max_doublings = settings.DOUBLING_MAX_STEPS if max_doublings is None else max_doublings
    program_max_len = settings.DOUBLING_PROGRAM_MAX_LEN if program_max_len is None else program_max_len

    result = DoublingResult(stable=False)
    streak = 0
    n = n_start
    for step in range(max_doublings + 1):
        sized = problem.at_size(n)
        try:
            winner = optimal_search(sized, program_max_len=program_max_len, hint_max_bytes=hint_max_bytes,
                                    fuel_cap=fuel_cap, trial_budget=trial_budget, max_inputs=max_inputs)
            if winner is None:
                winner = lookup_winner(sized, memory_budget)
        except (BudgetExceededError, MemoryBudgetError) as exc:
            logger.warning("Doubling search stopped at n=%d: %s", n, exc)
            result.stop_reason = f"budget exhausted at n={n}: {exc}"
            return result
        level = _history_level(result.history, n, winner.worst_fuel)
        previous = result.history[-1] if result.history else None
        result.history.append(DoublingStep(n, winner, level))
        logger.info("Doubling step n=%d: %s winner, fuel %d, class %s", n, winner.program.kind.value,
                    winner.worst_fuel, level.label if level else "undefined")
        if window == 0:
            result.stable = True
            result.stop_reason = "window 0"
            return result
        if (previous is not None and level is not None and previous.level == level
                and previous.winner.program.identity() == winner.program.identity()):
            streak += 1
        else:
            streak = 0
        if streak >= window:
            result.stable = True
            result.stop_reason = f"stable over {window} doublings"
            return result
        n *= 2
    result.stop_reason = f"no stability within {max_doublings} doublings"
    return result
