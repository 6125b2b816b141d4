#!/usr/bin/env python3
"""
Tests for canonical program enumeration
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.enumeration import (
    EnumerationCursor, OperandBounds, advance, alphabet_size, count_programs, enumerate_programs,
    iter_programs, position_alphabet, program_at,
)
from src.core.errors import EnumerationExhausted, InputError
from src.core.vm import Instruction, Opcode

OUTPUT_ONLY = OperandBounds()


@pytest.mark.parametrize("length, expected", [(1, 15), (2, 289), (3, 6859), (4, 194481)])
def test_program_counts_without_reads(length, expected):
    assert count_programs(length, OUTPUT_ONLY) == expected


def test_alphabet_size_counts_read_operands():
    bounds = OperandBounds(input_width=3, hint_bits=8)
    assert alphabet_size(2, bounds) == 13 + 3 + 8 + 4
    assert len(position_alphabet(2, 1, bounds)) == alphabet_size(2, bounds)


def test_alphabet_order_follows_opcode_numbering():
    alphabet = position_alphabet(2, 1, OperandBounds(input_width=2))
    assert alphabet[:4] == [Instruction(Opcode.PUSH0, 0), Instruction(Opcode.PUSH1, 0),
                            Instruction(Opcode.READ_INPUT, 0), Instruction(Opcode.READ_INPUT, 1)]
    jumps = [i for i in alphabet if i.op is Opcode.JZ]
    assert jumps == [Instruction(Opcode.JZ, -1), Instruction(Opcode.JZ, 0)]
    assert alphabet[-1] == Instruction(Opcode.HALT, 0)


def test_first_programs():
    program, cursor = enumerate_programs(2)
    assert program == (Instruction(Opcode.PUSH0, 0),)
    assert cursor == EnumerationCursor(1, 1)
    assert program_at(EnumerationCursor(1, 14), OUTPUT_ONLY) == (Instruction(Opcode.HALT, 0),)
    assert advance(EnumerationCursor(1, 14), OUTPUT_ONLY) == EnumerationCursor(2, 0)


def test_enumeration_limits():
    with pytest.raises(InputError):
        enumerate_programs(0)
    with pytest.raises(EnumerationExhausted):
        enumerate_programs(1, EnumerationCursor(2, 0))
    with pytest.raises(EnumerationExhausted):
        program_at(EnumerationCursor(1, 15), OUTPUT_ONLY)


def test_stream_matches_cursor_decoding():
    seen = list(iter_programs(2))
    assert len(seen) == 15 + 289
    for cursor, program in seen:
        assert program_at(cursor, OUTPUT_ONLY) == program
    assert [c for c, _ in seen] == sorted(c for c, _ in seen)


def test_stream_resumes_from_cursor():
    everything = list(iter_programs(2))
    start = EnumerationCursor(2, 100)
    resumed = list(iter_programs(2, start=start))
    assert resumed == everything[15 + 100:]


def test_cursor_serialisation():
    cursor = EnumerationCursor(3, 42)
    assert EnumerationCursor.from_dict(cursor.to_dict()) == cursor
    assert EnumerationCursor(2, 999) < EnumerationCursor(3, 0)


@given(st.integers(min_value=0, max_value=count_programs(3, OperandBounds(input_width=1)) - 1))
@settings(max_examples=50, deadline=None)
def test_decoded_programs_have_in_bounds_jumps(index):
    bounds = OperandBounds(input_width=1)
    program = program_at(EnumerationCursor(3, index), bounds)
    assert len(program) == 3
    for pc, instruction in enumerate(program):
        if instruction.op in (Opcode.JZ, Opcode.JMP):
            assert 0 <= pc + instruction.arg < 3
        if instruction.op is Opcode.READ_INPUT:
            assert instruction.arg == 0


if __name__ == "__main__":
    pytest.main([__file__])
