#!/usr/bin/env python3
"""
Tests for the 3CNF-SAT pack and the DIMACS codec
"""

import itertools
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.errors import SatInputError
from src.core.sat import (
    Assignment, Cnf3Instance, GeneratorMode, Verdict, from_dimacs, hardness_summary, incremental_hardness,
    sat_decide_baseline, sat_decode, sat_encode, sat_generate, sat_hardness_profile, sat_is_decomposable,
    sat_truth_table, sat_universe_size, sat_verify, select_clauses, to_dimacs,
)
from src.utils.dimacs import format_dimacs, parse_dimacs

ALL_SIGNS = Cnf3Instance(3, tuple(
    tuple(v if s else -v for v, s in zip((1, 2, 3), signs))
    for signs in itertools.product((True, False), repeat=3)
))
ONE_CLAUSE = Cnf3Instance(3, ((1, 2, 3),))


def test_truth_table_first_assignment():
    assert str(sat_truth_table(ONE_CLAUSE)) == "001"
    assert sat_truth_table(ALL_SIGNS) is None


def test_baseline_branches_true_first():
    result = sat_decide_baseline(ONE_CLAUSE)
    assert result.verdict is Verdict.SAT
    assert str(result.assignment) == "100"
    assert result.steps == 1
    assert result.to_dict() == {"verdict": "sat", "assignment": "100", "steps": 1}


def test_baseline_unsat_and_timeout():
    assert sat_decide_baseline(ALL_SIGNS).verdict is Verdict.UNSAT
    timed_out = sat_decide_baseline(ALL_SIGNS, step_budget=1)
    assert timed_out.verdict is Verdict.TIMEOUT
    assert timed_out.steps == 1
    assert timed_out.assignment is None


@pytest.mark.parametrize("clauses", [((1, 2, 0),), ((1, 2, 4),), ((1, -1, 2),), ((1, 2),)],
                         ids=["zero-literal", "out-of-range", "complementary", "two-literals"])
def test_instance_validation(clauses):
    with pytest.raises(SatInputError):
        Cnf3Instance(3, clauses)


def test_verify_checks_assignment_width():
    assert sat_verify(ONE_CLAUSE, Assignment.from_string("010"))
    assert not sat_verify(ONE_CLAUSE, Assignment.from_string("000"))
    with pytest.raises(SatInputError):
        sat_verify(ONE_CLAUSE, Assignment.from_string("01"))


def test_uniform_generator_is_seeded_and_distinct():
    first = sat_generate(6, 20, seed=3)
    assert first == sat_generate(6, 20, seed=3)
    assert len({tuple(sorted(c)) for c in first.clauses}) == 20
    with pytest.raises(SatInputError):
        sat_generate(3, 9, seed=0)
    with pytest.raises(SatInputError):
        sat_generate(2, 1, seed=0)


def test_planted_instances_are_satisfied_by_their_plant():
    instance = sat_generate(8, 40, seed=1, mode=GeneratorMode.PLANTED)
    assert sat_verify(instance, Assignment(instance.planted))


def test_subset_mode_keeps_mother_order():
    mother = sat_generate(6, 20, seed=2)
    subset = sat_generate(6, 5, seed=9, mode=GeneratorMode.SUBSET, mother=mother)
    positions = [mother.clauses.index(c) for c in subset.clauses]
    assert positions == sorted(positions)
    with pytest.raises(SatInputError):
        sat_generate(6, 21, seed=9, mode=GeneratorMode.SUBSET, mother=mother)
    with pytest.raises(SatInputError):
        sat_generate(6, 5, seed=9, mode=GeneratorMode.SUBSET)


def test_decomposability():
    assert sat_is_decomposable(Cnf3Instance(4, ((1, 2, 3),)))
    assert not sat_is_decomposable(ONE_CLAUSE)
    assert sat_is_decomposable(Cnf3Instance(6, ((1, 2, 3), (4, 5, 6))))
    assert not sat_is_decomposable(Cnf3Instance(5, ((1, 2, 3), (3, 4, 5))))


def test_universe_size():
    assert sat_universe_size(3) == 0
    assert sat_universe_size(4) == 1 << 16
    with pytest.raises(SatInputError):
        sat_universe_size(2)


def test_bit_encoding():
    instance = Cnf3Instance(3, ((1, -2, 3),))
    bits = sat_encode(instance)
    assert bits == "00000011" "00000001" "000" "101" "010"
    assert sat_decode(bits) == instance
    with pytest.raises(SatInputError):
        sat_decode(bits[:-1])
    with pytest.raises(SatInputError):
        sat_decode("0101")


def test_select_clauses():
    mother = Cnf3Instance(3, ((1, 2, 3), (-1, 2, 3), (1, -2, -3)))
    assert select_clauses(mother, "101").clauses == ((1, 2, 3), (1, -2, -3))
    assert select_clauses(mother, "").m == 0
    with pytest.raises(SatInputError):
        select_clauses(mother, "1111")


def test_dimacs_parsing():
    text = "c example\np cnf 3 2\n1 -2 3 0\n-1 2\n3 0\n"
    assert parse_dimacs(text) == (3, [[1, -2, 3], [-1, 2, 3]])
    assert from_dimacs(text).clauses == ((1, -2, 3), (-1, 2, 3))
    assert format_dimacs(3, [[1, -2, 3]], comments=["x"]) == "c x\np cnf 3 1\n1 -2 3 0\n"
    assert from_dimacs(to_dimacs(ONE_CLAUSE, "one")) == ONE_CLAUSE


@pytest.mark.parametrize("text", [
    "p cnf 3 2\n1 2 3 0\n",
    "1 2 3 0\np cnf 3 1\n",
    "p cnf 3 1\n1 two 3 0\n",
    "1 2 3 0\n",
    "p dnf 3 1\n1 2 3 0\n",
], ids=["count-mismatch", "clause-first", "bad-token", "no-problem-line", "wrong-format"])
def test_dimacs_errors(text):
    with pytest.raises(SatInputError):
        parse_dimacs(text)


def test_hardness_profile_and_summary():
    instances = [sat_generate(5, 21, seed=s) for s in range(4)] + [Cnf3Instance(6, ((1, 2, 3), (4, 5, 6)))]
    profile = sat_hardness_profile(instances, step_budget=500)
    assert len(profile) == 5
    assert bool(profile.iloc[-1]["decomposable"])
    filtered = sat_hardness_profile(instances, step_budget=500, exclude_decomposable=True)
    assert len(filtered) == len(profile) - int(profile["decomposable"].sum())
    summary = hardness_summary(profile)
    assert summary["instances"].sum() == 5
    assert hardness_summary(profile.iloc[0:0]).empty


def test_incremental_hardness_columns():
    frame = incremental_hardness([5, 6], 4.26, range(3), step_budget=200)
    assert list(frame["n"]) == [5, 6]
    assert list(frame["m"]) == [21, 26]
    assert frame["additional_hard"].iloc[0] == frame["hard"].iloc[0]


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=30, deadline=None)
def test_baseline_agrees_with_truth_table(seed):
    instance = sat_generate(5, 21, seed)
    result = sat_decide_baseline(instance)
    expected = sat_truth_table(instance)
    assert (result.verdict is Verdict.SAT) == (expected is not None)
    if result.assignment is not None:
        assert sat_verify(instance, result.assignment)


if __name__ == "__main__":
    pytest.main([__file__])
