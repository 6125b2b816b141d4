#!/usr/bin/env python3
"""
Tests for the stateful candidate search and its checkpoints
"""

import random
import sys
from pathlib import Path

import pytest

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.enumeration import OperandBounds
from src.core.errors import InputError, MemoryBudgetError
from src.core.packs import firstbit_problem, parity_problem
from src.core.problem import ProblemStatement, goldens_from_oracle
from src.core.search_loop import (
    Candidate, EvalRecord, HintStrategy, InputOutcome, SearchCheckpoint, SearchConfig, SearchState,
    checkpoint_bytes, crossover, evaluate, exhaustive_hint, from_checkpoint, inductive_hint, load_checkpoint,
    mutate_hint, mutate_program, pair_digest, reward, run_search, save_checkpoint, search_step,
)
from src.core.vm import Hint, Instruction, Opcode, RunStatus, run

CONFIG = SearchConfig(program_max_len=3, hint_max_bytes=0, epsilon=0.5)
COPY_FIRST = (Instruction(Opcode.READ_INPUT, 0), Instruction(Opcode.OUTPUT, 0), Instruction(Opcode.HALT, 0))


def test_exhaustive_hints_in_length_then_value_order():
    assert exhaustive_hint(0, 1) == Hint(b"")
    assert exhaustive_hint(1, 1) == Hint(b"\x00")
    assert exhaustive_hint(256, 1) == Hint(b"\xff")
    assert exhaustive_hint(257, 1) is None


def test_inductive_hint_extends_base():
    assert inductive_hint(Hint(b"\x01"), 5, 2) == Hint(b"\x01\x05")
    assert inductive_hint(Hint(b"\x01\x02"), 5, 2) is None
    assert inductive_hint(Hint(), 256, 2) is None


def test_mutate_hint_flips_one_bit():
    rng = random.Random(3)
    original = Hint(b"\x0f\xf0")
    mutated = mutate_hint(original, rng, 2)
    flipped = sum(bin(a ^ b).count("1") for a, b in zip(original.data, mutated.data))
    assert flipped == 1
    assert mutate_hint(Hint(), rng, 0) is None
    assert mutate_hint(Hint(), rng, 1).size == 1


def test_program_mutation_and_crossover_stay_well_formed():
    rng = random.Random(11)
    bounds = OperandBounds(input_width=2)
    mutated = mutate_program(COPY_FIRST, rng, bounds)
    assert len(mutated) == 3
    assert sum(1 for a, b in zip(mutated, COPY_FIRST) if a != b) <= 1
    assert crossover(COPY_FIRST, COPY_FIRST[:2], rng) is None
    child = crossover(COPY_FIRST, (Instruction(Opcode.PUSH1, 0),) * 3, rng)
    assert len(child) == 3
    assert child[0] == COPY_FIRST[0]


def test_evaluate_counts_decision_outcomes():
    goldens = goldens_from_oracle(firstbit_problem(2))
    record = evaluate(Candidate(0, COPY_FIRST, HintStrategy.NONE), goldens, fuel_cap=10)
    assert record.correct == 6
    assert record.sensitivity == 1
    assert record.specificity == 1
    assert record.total_fuel == 18
    assert reward(record, 10) == pytest.approx(0.7)

    wrong = (Instruction(Opcode.PUSH1, 0), Instruction(Opcode.OUTPUT, 0), Instruction(Opcode.HALT, 0))
    record = evaluate(Candidate(1, wrong, HintStrategy.NONE), goldens, fuel_cap=10)
    assert record.false_positives == 3
    assert record.specificity == 0
    assert record.to_dict()["correct"] == 3


def test_reward_of_empty_record():
    assert reward(EvalRecord(0, (), 0), 10) == 0.0
    outcome = InputOutcome("1", RunStatus.HALTED, "1", 5, True)
    assert reward(EvalRecord(0, (outcome,), 5), 10) == pytest.approx(0.5)


def test_pair_digest_depends_on_hint():
    assert pair_digest(COPY_FIRST, Hint()) == pair_digest(COPY_FIRST, Hint())
    assert pair_digest(COPY_FIRST, Hint()) != pair_digest(COPY_FIRST, Hint(b"\x00"))


def test_failed_pairs_become_tabu():
    problem = firstbit_problem(2)
    goldens = goldens_from_oracle(problem)
    state = SearchState(seed=1, config=CONFIG)
    search_step(state, problem, goldens, fuel_cap=20)
    assert state.step == 1
    assert len(state.tabu) == 1
    assert state.log[0]["tabu"] is True
    assert state.add_candidate((Instruction(Opcode.PUSH0, 0),), HintStrategy.NONE) is None
    with pytest.raises(InputError):
        search_step(state, problem, [], fuel_cap=20)


def test_search_finds_adequate_constant_program():
    problem = ProblemStatement("one", lambda bits, out: out == "1", 1)
    goldens = goldens_from_oracle(problem)
    state = run_search(problem, goldens, steps=3000, fuel_cap=30, seed=4, config=CONFIG)
    assert 1 in state.adequate
    entry = state.adequate[1]
    assert entry.worst_fuel == 3
    for datum in goldens:
        assert run(entry.program, entry.hint, datum.input, 30).output == "1"
    assert sum(state.strategy_counts.values()) >= 1


def test_search_stops_when_space_exhausted():
    """Length-one programs cannot solve parity; all 17 are tried and dropped"""
    problem = parity_problem(1)
    config = SearchConfig(program_max_len=1, hint_max_bytes=0, epsilon=0.5)
    state = run_search(problem, goldens_from_oracle(problem), steps=100, fuel_cap=10, seed=0, config=config)
    assert state.enumeration_done
    assert state.step == 17
    assert not state.adequate


def test_checkpoint_resume_is_byte_identical(tmp_path):
    problem = firstbit_problem(2)
    goldens = goldens_from_oracle(problem)
    straight = run_search(problem, goldens, steps=40, fuel_cap=20, seed=5, config=CONFIG,
                          stop_when_adequate=False)

    first_half = run_search(problem, goldens, steps=20, fuel_cap=20, seed=5, config=CONFIG,
                            stop_when_adequate=False)
    path = save_checkpoint(first_half, "firstbit", tmp_path / "search.json")
    resumed, name = load_checkpoint(path)
    assert name == "firstbit"
    assert checkpoint_bytes(resumed, name) == checkpoint_bytes(first_half, name)
    resumed = run_search(problem, goldens, steps=40, fuel_cap=20, state=resumed, stop_when_adequate=False)

    assert checkpoint_bytes(resumed, name) == checkpoint_bytes(straight, name)


def test_resume_after_500_of_1000_steps_matches_straight_run(tmp_path):
    problem = firstbit_problem(2)
    goldens = goldens_from_oracle(problem)
    straight = run_search(problem, goldens, steps=1000, fuel_cap=20, seed=9, config=CONFIG,
                          stop_when_adequate=False)
    assert straight.step == 1000

    half = run_search(problem, goldens, steps=500, fuel_cap=20, seed=9, config=CONFIG, stop_when_adequate=False)
    resumed, name = load_checkpoint(save_checkpoint(half, "firstbit", tmp_path / "half.json"))
    resumed = run_search(problem, goldens, steps=1000, fuel_cap=20, state=resumed, stop_when_adequate=False)

    assert checkpoint_bytes(resumed, name) == checkpoint_bytes(straight, name)
    assert resumed.adequate == straight.adequate


def test_faster_correct_candidate_gets_most_pulls():
    problem = firstbit_problem(2)
    goldens = goldens_from_oracle(problem)
    slow = (Instruction(Opcode.PUSH0, 0), Instruction(Opcode.POP, 0)) * 3 + COPY_FIRST
    state = SearchState(seed=2, config=SearchConfig(program_max_len=3, hint_max_bytes=0, epsilon=0.0))
    slow_id = state.add_candidate(slow, HintStrategy.NONE)
    fast_id = state.add_candidate(COPY_FIRST, HintStrategy.NONE)

    run_search(problem, goldens, steps=50, fuel_cap=10, state=state, stop_when_adequate=False)

    pulls = {cid: candidate.stats.pulls for cid, candidate in state.promising.items()}
    assert state.step == 50
    assert pulls[fast_id] + pulls[slow_id] == 50
    assert pulls[fast_id] >= 25


def test_checkpoint_limits_and_version():
    state = SearchState(seed=0, config=CONFIG)
    with pytest.raises(MemoryBudgetError):
        checkpoint_bytes(state, "firstbit", max_bytes=10)
    blob = checkpoint_bytes(state, "firstbit")
    assert blob.endswith(b"\n")
    checkpoint = SearchCheckpoint.model_validate_json(blob)
    with pytest.raises(InputError):
        from_checkpoint(checkpoint.model_copy(update={"format_version": 99}))


if __name__ == "__main__":
    pytest.main([__file__])
