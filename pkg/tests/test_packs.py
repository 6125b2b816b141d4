#!/usr/bin/env python3
"""
Tests for the problem pack registry
"""

import sys
from functools import partial
from pathlib import Path

import pytest

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.errors import InputError, UnknownPackError
from src.core.kolmogorov import ProgramCatalog
from src.core.packs import (
    PACKS, _kc_verifier, build_problem, factor_width, get_pack, mother_instance, mother_variables,
    smallest_factor,
)
from src.core.sat import sat_truth_table, select_clauses


def test_registry():
    assert sorted(PACKS) == ["allones", "factor", "firstbit", "kc", "parity", "sat"]
    assert get_pack("sat").seeded
    assert not get_pack("parity").seeded


def test_unknown_pack():
    with pytest.raises(UnknownPackError) as err:
        get_pack("tsp")
    assert "choose from" in str(err.value)
    assert isinstance(err.value, InputError)


@pytest.mark.parametrize("name,bits,expected", [
    ("parity", "1101", "1"),
    ("parity", "", "0"),
    ("allones", "111", "1"),
    ("allones", "", "1"),
    ("allones", "101", "0"),
    ("firstbit", "011", "0"),
])
def test_decision_packs(name, bits, expected):
    problem = build_problem(name, 4)
    assert problem.first_output(bits) == expected


def test_universes():
    assert len(build_problem("parity", 3).inputs()) == 15
    assert "" not in build_problem("firstbit", 3).inputs()
    assert len(build_problem("firstbit", 3).inputs()) == 14


def test_resize_keeps_the_pack():
    problem = build_problem("allones", 2).at_size(5)
    assert problem.name == "allones"
    assert problem.n0 == 5


@pytest.mark.parametrize("value,expected", [
    (0, 0), (1, 0), (2, 0), (7, 0), (4, 2), (15, 3), (49, 7), (221, 13),
])
def test_smallest_factor(value, expected):
    assert smallest_factor(value) == expected


def test_factor_pack():
    assert factor_width(1) == 1
    assert factor_width(5) == 3
    problem = build_problem("factor", 4)
    assert problem.output_bits == 2
    assert problem.verifier("1111", "11")
    assert problem.verifier("0111", "00")
    assert not problem.verifier("1111", "01")


def test_sat_mother_is_seeded():
    assert mother_variables(4) == 3
    assert mother_variables(43) == 10
    assert mother_instance(6, 5) is mother_instance(6, 5)
    problem = build_problem("sat", 6, seed=5)
    assert "seed 5" in problem.description
    assert build_problem("sat", 6, seed=6).description.endswith("(seed 6)")


def test_sat_pack_answers_subset_satisfiability():
    mother = mother_instance(6, 5)
    problem = build_problem("sat", 6, seed=5)
    assert problem.first_output("") == "1"
    for bits in ("111111", "101010", "000001"):
        expected = "1" if sat_truth_table(select_clauses(mother, bits)) is not None else "0"
        assert problem.first_output(bits) == expected


def test_kc_verifier():
    catalog = ProgramCatalog(max_len=3, fuel=16, lengths=range(1, 5))
    verify = partial(_kc_verifier, catalog)
    assert verify("0000", "1")
    assert verify("0", "0")
    tiny = ProgramCatalog(max_len=2, fuel=16, lengths=range(1, 5))
    assert partial(_kc_verifier, tiny)("0000", "0")


if __name__ == "__main__":
    pytest.main([__file__])
