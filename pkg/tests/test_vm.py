#!/usr/bin/env python3
"""
Tests for the fuel-metered bit-stack machine
"""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.errors import InputError, ProgramParseError
from src.core.vm import (
    EMPTY_HINT, Hint, Opcode, RunStatus, check_bytecode, digest, format_program, input_tape, ins, parse_program,
    run,
)

COPY_FIRST = check_bytecode([ins(Opcode.READ_INPUT, 0), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
ZEROS_FOREVER = check_bytecode([ins(Opcode.PUSH0), ins(Opcode.OUTPUT), ins(Opcode.JMP, -2)])


def test_copy_first_bit():
    outcome = run(COPY_FIRST, EMPTY_HINT, "10", fuel=10)
    assert outcome.halted
    assert outcome.output == "1"
    assert outcome.fuel_used == 3
    assert outcome.fuel_granted == 10


def test_end_marker_follows_the_input():
    """The cell after the last input bit reads 1, so the empty input copies as 1"""
    assert run(COPY_FIRST, EMPTY_HINT, "", fuel=10).output == "1"
    read_one = check_bytecode([ins(Opcode.READ_INPUT, 1), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    assert run(read_one, EMPTY_HINT, "0", fuel=10).output == "1"
    assert run(read_one, EMPTY_HINT, "00", fuel=10).output == "0"


def test_read_past_the_tape_traps():
    read_two = check_bytecode([ins(Opcode.READ_INPUT, 2), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    outcome = run(read_two, EMPTY_HINT, "0", fuel=10)
    assert outcome.status is RunStatus.TRAPPED
    assert outcome.output is None
    assert "input index 2" in outcome.trap


@pytest.mark.parametrize("bits, expected", [("", "0"), ("1", "0"), ("11", "1"), ("0", "0")])
def test_declared_width_pads_with_zeros(bits, expected):
    read_two = check_bytecode([ins(Opcode.READ_INPUT, 2), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    outcome = run(read_two, EMPTY_HINT, bits, fuel=10, input_width=2)
    assert outcome.halted
    assert outcome.output == expected


def test_input_wider_than_declared_is_rejected():
    with pytest.raises(InputError):
        run(COPY_FIRST, EMPTY_HINT, "101", fuel=10, input_width=2)
    assert input_tape("01", 4) == [0, 1, 1, 0, 0]


def test_read_hint_bits_most_significant_first():
    code = check_bytecode([ins(Opcode.READ_HINT, 0), ins(Opcode.OUTPUT), ins(Opcode.READ_HINT, 7),
                           ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    assert run(code, Hint(b"\x80"), "", fuel=10).output == "10"
    assert run(code, Hint(b"\x01"), "", fuel=10).output == "01"
    assert run(code, EMPTY_HINT, "", fuel=10).status is RunStatus.TRAPPED


def test_fuel_exhaustion_keeps_emitted_bits():
    outcome = run(ZEROS_FOREVER, EMPTY_HINT, "", fuel=7)
    assert outcome.status is RunStatus.FUEL_EXHAUSTED
    assert outcome.output is None
    assert outcome.fuel_used == 7
    assert outcome.emitted == "00"


def test_output_limit_halts():
    outcome = run(ZEROS_FOREVER, EMPTY_HINT, "", fuel=100, output_limit=4)
    assert outcome.halted
    assert outcome.output == "0000"
    assert outcome.fuel_used == 11


@pytest.mark.parametrize("op, a, b, expected", [
    (Opcode.AND, 1, 1, "1"), (Opcode.AND, 1, 0, "0"),
    (Opcode.OR, 0, 1, "1"), (Opcode.OR, 0, 0, "0"),
    (Opcode.XOR, 1, 1, "0"), (Opcode.ADD, 1, 1, "0"), (Opcode.ADD, 1, 0, "1"),
    (Opcode.LT, 0, 1, "1"), (Opcode.LT, 1, 0, "0"),
])
def test_binary_operators(op, a, b, expected):
    code = check_bytecode([ins(a), ins(b), ins(op), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    assert run(code, EMPTY_HINT, "", fuel=10).output == expected


def test_stack_manipulation():
    code = check_bytecode([ins(Opcode.PUSH1), ins(Opcode.PUSH0), ins(Opcode.SWAP), ins(Opcode.OUTPUT),
                           ins(Opcode.DUP), ins(Opcode.NOT), ins(Opcode.OUTPUT), ins(Opcode.POP),
                           ins(Opcode.HALT)])
    assert run(code, EMPTY_HINT, "", fuel=20).output == "11"


def test_underflow_traps():
    code = check_bytecode([ins(Opcode.OUTPUT)])
    outcome = run(code, EMPTY_HINT, "", fuel=5)
    assert outcome.status is RunStatus.TRAPPED
    assert outcome.trap == "stack underflow"


def test_running_off_the_end_traps():
    outcome = run(check_bytecode([ins(Opcode.PUSH0)]), EMPTY_HINT, "", fuel=5)
    assert outcome.status is RunStatus.TRAPPED
    assert "outside code" in outcome.trap


def test_jz_jumps_relative_to_itself():
    """JZ 3 at pc 1 lands on pc 4"""
    code = check_bytecode([ins(Opcode.READ_INPUT, 0), ins(Opcode.JZ, 3), ins(Opcode.PUSH1),
                           ins(Opcode.JMP, 2), ins(Opcode.PUSH0), ins(Opcode.OUTPUT), ins(Opcode.HALT)])
    assert run(code, EMPTY_HINT, "0", fuel=20).output == "0"
    assert run(code, EMPTY_HINT, "1", fuel=20).output == "1"


def test_check_bytecode_rejects_bad_programs():
    with pytest.raises(InputError):
        check_bytecode([])
    with pytest.raises(InputError):
        check_bytecode([ins(Opcode.JMP, 5)])
    with pytest.raises(InputError):
        check_bytecode([ins(Opcode.PUSH0), ins(Opcode.HALT)], max_len=1)
    with pytest.raises(InputError):
        check_bytecode([ins(Opcode.READ_INPUT, -1)])


def test_program_text_round_trip():
    text = format_program(ZEROS_FOREVER)
    assert text == "PUSH0\nOUTPUT\nJMP -2\n"
    assert parse_program(text) == ZEROS_FOREVER


@pytest.mark.parametrize("text, line", [("PUSH0\nFROB\n", 2), ("JMP\n", 1), ("HALT 3\n", 1), ("JZ x\n", 1)])
def test_parse_program_reports_line(text, line):
    with pytest.raises(ProgramParseError) as info:
        parse_program(text)
    assert info.value.line == line


def test_hint_from_int():
    assert Hint.from_int(5, 2).data == b"\x00\x05"
    assert Hint.from_int(0, 0).size == 0


def test_snapshots_and_digest():
    outcome = run(ZEROS_FOREVER, EMPTY_HINT, "", fuel=100, output_limit=4, snapshot_every=3)
    assert [d.step for d in outcome.digests] == [3, 6, 9]
    summary = digest(outcome)
    assert summary.status is RunStatus.HALTED
    assert summary.first_state == outcome.digests[0].digest
    assert summary.to_dict()["status"] == "halted"
    again = digest(run(ZEROS_FOREVER, EMPTY_HINT, "", fuel=100, output_limit=4, snapshot_every=3))
    assert again == summary


@given(st.text(alphabet="01", max_size=16), st.integers(min_value=1, max_value=64))
@settings(max_examples=100, deadline=None)
def test_fuel_never_exceeds_grant(bits, fuel):
    outcome = run(ZEROS_FOREVER, EMPTY_HINT, bits, fuel=fuel)
    assert outcome.fuel_used <= fuel
    assert outcome.fuel_used == fuel
    assert outcome.emitted == "0" * ((fuel + 1) // 3)


def test_zero_fuel_rejected():
    with pytest.raises(InputError):
        run(COPY_FIRST, EMPTY_HINT, "1", fuel=0)


if __name__ == "__main__":
    pytest.main([__file__])
