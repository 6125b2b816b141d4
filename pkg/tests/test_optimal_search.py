#!/usr/bin/env python3
"""
Tests for exhaustive optimal search and the doubling search
"""

import itertools
import sys
from pathlib import Path

import pytest

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.complexity import Level
from src.core.errors import BudgetExceededError, InputError, MemoryBudgetError
from src.core.optimal_search import (
    SearchWinner, correctness_cases, doubling_search, hint_classes, lookup_winner, optimal_search,
)
from src.core.packs import allones_problem, firstbit_problem, parity_problem
from src.core.problem import HintedProgram, ProblemStatement, SolverKind
from src.core.vm import EMPTY_HINT, Hint, Instruction, Opcode, check_bytecode, ins, run

COPY_FIRST = (Instruction(Opcode.READ_INPUT, 0), Instruction(Opcode.OUTPUT, 0), Instruction(Opcode.HALT, 0))


def test_firstbit_winner_is_copy_first():
    winner = optimal_search(firstbit_problem(2), program_max_len=3, hint_max_bytes=0, fuel_cap=50)
    assert winner is not None
    assert winner.program.code == COPY_FIRST
    assert winner.worst_fuel == 3
    assert winner.hint == EMPTY_HINT


def test_constant_answer_needs_no_reads():
    problem = ProblemStatement("one", lambda bits, out: out == "1", 2)
    winner = optimal_search(problem, program_max_len=3, hint_max_bytes=0, fuel_cap=50)
    assert winner.program.code == (Instruction(Opcode.PUSH1, 0), Instruction(Opcode.OUTPUT, 0),
                                   Instruction(Opcode.HALT, 0))


def test_allones_over_the_empty_input():
    """Cell 0 holds the end marker on the empty input, so copying it decides all-ones at n0=1"""
    winner = optimal_search(allones_problem(1), program_max_len=4, hint_max_bytes=0, fuel_cap=50)
    assert winner is not None
    assert winner.program.code == COPY_FIRST
    assert winner.worst_fuel == 3


def test_direct_parity_program_without_hints():
    """XOR of the whole tape is parity plus the end marker"""
    problem = parity_problem(3)
    code = check_bytecode(
        [ins(Opcode.READ_INPUT, 0), ins(Opcode.READ_INPUT, 1), ins(Opcode.XOR), ins(Opcode.READ_INPUT, 2),
         ins(Opcode.XOR), ins(Opcode.READ_INPUT, 3), ins(Opcode.XOR), ins(Opcode.NOT), ins(Opcode.OUTPUT),
         ins(Opcode.HALT)]
    )
    program = HintedProgram.bytecode(code)
    cases = correctness_cases(problem)
    assert len(cases) == 15
    for bits, accepted in cases:
        outcome = program.solve(EMPTY_HINT, bits, fuel=20, input_width=problem.n0)
        assert outcome.output in accepted, bits
        assert outcome.fuel_used == 10


def _brute_force_worst_fuel(problem, max_len, fuel_cap):
    """Smallest worst-case fuel over every well-formed program, no pruning"""
    plain = [Instruction(op, 0) for op in Opcode if op not in (Opcode.READ_INPUT, Opcode.READ_HINT,
                                                                 Opcode.JZ, Opcode.JMP)]
    reads = [Instruction(Opcode.READ_INPUT, i) for i in range(problem.n0 + 1)]
    cases = [(bits, set(problem.accepted_outputs(bits))) for bits in problem.inputs()]
    best = None
    for length in range(1, max_len + 1):
        jumps = [Instruction(op, offset) for op in (Opcode.JZ, Opcode.JMP) for offset in range(-length, length)]
        for code in itertools.product(plain + reads + jumps, repeat=length):
            try:
                code = check_bytecode(code)
            except InputError:
                continue
            worst = 0
            for bits, accepted in cases:
                outcome = run(code, EMPTY_HINT, bits, fuel_cap, input_width=problem.n0)
                if not outcome.halted or outcome.output not in accepted:
                    worst = None
                    break
                worst = max(worst, outcome.fuel_used)
            if worst is not None and (best is None or worst < best):
                best = worst
    return best


@pytest.mark.parametrize("problem", [
    firstbit_problem(2),
    allones_problem(1),
    parity_problem(1),
    ProblemStatement("zero", lambda bits, out: out == "0", 1),
], ids=["firstbit", "allones", "parity", "zero"])
def test_search_matches_brute_force(problem):
    expected = _brute_force_worst_fuel(problem, max_len=3, fuel_cap=30)
    for hint_max_bytes in (0, 1):
        winner = optimal_search(problem, program_max_len=3, hint_max_bytes=hint_max_bytes, fuel_cap=30)
        assert (winner.worst_fuel if winner else None) == expected
        if winner is not None:
            assert winner.hint.size == 0


def test_hint_classes_cover_read_bits():
    code = check_bytecode([ins(Opcode.READ_HINT, 0), ins(Opcode.READ_HINT, 3), ins(Opcode.HALT)])
    assert hint_classes(code, 1) == [0, 16, 128, 144]
    assert hint_classes(code, 0) == [0]
    assert hint_classes(COPY_FIRST, 2) == [0]


def test_rank_key_tie_breaking():
    short = SearchWinner(HintedProgram.bytecode(COPY_FIRST), EMPTY_HINT, 3, program_index=9)
    longer = SearchWinner(HintedProgram.bytecode(COPY_FIRST + (Instruction(Opcode.HALT, 0),)), EMPTY_HINT, 3)
    hinted = SearchWinner(HintedProgram.bytecode(COPY_FIRST), Hint(b"\x00"), 3)
    assert short.rank_key < longer.rank_key
    assert short.rank_key < hinted.rank_key
    assert short.to_dict()["program"] == "READ_INPUT 0\nOUTPUT\nHALT\n"


def test_trial_budget_raises_with_cursor():
    with pytest.raises(BudgetExceededError) as info:
        optimal_search(firstbit_problem(2), program_max_len=3, hint_max_bytes=0, fuel_cap=50, trial_budget=5)
    assert info.value.cursor is not None
    assert info.value.cursor.length == 1


def test_search_argument_checks():
    with pytest.raises(InputError):
        optimal_search(firstbit_problem(2), program_max_len=0)


def test_lookup_winner_scores_probes():
    winner = lookup_winner(parity_problem(2))
    assert winner.program.kind is SolverKind.LOOKUP
    assert 1 <= winner.worst_fuel <= 3


def test_doubling_search_settles_on_copy_first():
    result = doubling_search(firstbit_problem(2), 2, stability_window=1, max_doublings=5,
                             program_max_len=3, fuel_cap=50)
    assert result.stable
    assert [step.n for step in result.history] == [2, 4, 8]
    assert result.history[0].level is None
    assert result.history[-1].level is Level.CONST
    assert result.winner.program.code == COPY_FIRST
    assert "evidence, not proof" in result.to_dict()["note"]


def test_doubling_falls_back_to_lookup():
    result = doubling_search(parity_problem(2), 2, stability_window=0, program_max_len=1, fuel_cap=20)
    assert result.stable
    assert result.stop_reason == "window 0"
    assert result.winner.program.kind is SolverKind.LOOKUP


def test_doubling_budget_stop():
    result = doubling_search(firstbit_problem(2), 2, stability_window=2, program_max_len=3,
                             fuel_cap=50, trial_budget=1)
    assert not result.stable
    assert result.stop_reason.startswith("budget exhausted")
    with pytest.raises(InputError):
        doubling_search(firstbit_problem(2), 1)



def test_doubling_stability_ignores_the_lookup_table():
    """The table grows with n, yet the same lookup procedure at the same class counts as stable"""
    result = doubling_search(allones_problem(4), 4, stability_window=1, max_doublings=3,
                             program_max_len=2, fuel_cap=50)
    assert result.stable
    assert [step.n for step in result.history] == [4, 8, 16]
    assert all(step.winner.program.kind is SolverKind.LOOKUP for step in result.history)
    assert result.history[-1].level == result.history[-2].level
    assert result.history[-1].winner.hint != result.history[-2].winner.hint


def test_doubling_stops_before_enumerating_a_huge_universe():
    result = doubling_search(allones_problem(2), 2, stability_window=2, max_doublings=4,
                             program_max_len=3, fuel_cap=200, max_inputs=1 << 10)
    assert not result.stable
    assert [step.n for step in result.history] == [2, 4, 8]
    assert result.stop_reason.startswith("budget exhausted at n=16")


def test_search_refuses_oversized_universe():
    with pytest.raises(MemoryBudgetError):
        optimal_search(allones_problem(40), program_max_len=1, hint_max_bytes=0, fuel_cap=10)
    with pytest.raises(MemoryBudgetError):
        correctness_cases(parity_problem(3), max_inputs=14)
    assert len(correctness_cases(parity_problem(3), max_inputs=15)) == 15


if __name__ == "__main__":
    pytest.main([__file__])
