#!/usr/bin/env python3
"""
Canonical program enumeration

Programs are ordered by length, then lexicographically over per-position
alphabets. A position's alphabet lists opcodes in their numbering with
operands ascending: READ_INPUT/READ_HINT take every in-bounds index and
JZ/JMP every relative offset that lands inside the program.
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from .errors import EnumerationExhausted, InputError
from .vm import Bytecode, Instruction, Opcode


@dataclass(frozen=True)
class OperandBounds:
    """READ_INPUT takes operands below input_width, READ_HINT below hint_bits"""
    input_width: int = 0
    hint_bits: int = 0


def tape_bounds(n0: int, hint_bits: int = 0) -> OperandBounds:
    """Operands for inputs of at most n0 bits: the end-marker cell is readable too"""
    return OperandBounds(input_width=n0 + 1, hint_bits=hint_bits)


@dataclass(frozen=True)
class EnumerationCursor:
    """Position in the enumeration: program length and index within that length"""
    length: int = 1
    index: int = 0

    def to_dict(self):
        return {"length": self.length, "index": self.index}

    @classmethod
    def from_dict(cls, data) -> "EnumerationCursor":
        return cls(int(data["length"]), int(data["index"]))

    def __lt__(self, other: "EnumerationCursor") -> bool:
        return (self.length, self.index) < (other.length, other.index)


def position_alphabet(length: int, position: int, bounds: OperandBounds) -> List[Instruction]:
    alphabet = []
    for op in Opcode:
        if op is Opcode.READ_INPUT:
            alphabet.extend(Instruction(op, i) for i in range(bounds.input_width))
        elif op is Opcode.READ_HINT:
            alphabet.extend(Instruction(op, i) for i in range(bounds.hint_bits))
        elif op in (Opcode.JZ, Opcode.JMP):
            alphabet.extend(Instruction(op, target - position) for target in range(length))
        else:
            alphabet.append(Instruction(op, 0))
    return alphabet


def alphabet_size(length: int, bounds: OperandBounds) -> int:
    fixed = len(Opcode) - 4
    return fixed + bounds.input_width + bounds.hint_bits + 2 * length


def count_programs(length: int, bounds: OperandBounds) -> int:
    return alphabet_size(length, bounds) ** length


def program_at(cursor: EnumerationCursor, bounds: OperandBounds) -> Bytecode:
    """Decode a cursor; position 0 is the most significant digit"""
    radix = alphabet_size(cursor.length, bounds)
    if not 0 <= cursor.index < radix ** cursor.length:
        raise EnumerationExhausted(f"index {cursor.index} past the end of length {cursor.length}")
    digits = []
    index = cursor.index
    for _ in range(cursor.length):
        index, digit = divmod(index, radix)
        digits.append(digit)
    digits.reverse()
    return tuple(position_alphabet(cursor.length, position, bounds)[digit]
                 for position, digit in enumerate(digits))


def advance(cursor: EnumerationCursor, bounds: OperandBounds) -> EnumerationCursor:
    if cursor.index + 1 < count_programs(cursor.length, bounds):
        return EnumerationCursor(cursor.length, cursor.index + 1)
    return EnumerationCursor(cursor.length + 1, 0)


def enumerate_programs(max_len: int, cursor: Optional[EnumerationCursor] = None,
                       bounds: OperandBounds = OperandBounds()) -> Tuple[Bytecode, EnumerationCursor]:
    """Program at ``cursor`` (default: the first) and the cursor after it"""
    if max_len < 1:
        raise InputError("max_len must be at least 1")
    cursor = cursor or EnumerationCursor()
    if cursor.length > max_len:
        raise EnumerationExhausted(f"enumeration past max_len {max_len}")
    return program_at(cursor, bounds), advance(cursor, bounds)


def iter_programs(max_len: int, bounds: OperandBounds = OperandBounds(),
                  start: Optional[EnumerationCursor] = None) -> Iterator[Tuple[EnumerationCursor, Bytecode]]:
    """Stream (cursor, program) pairs from ``start`` through the last program of ``max_len``"""
    start = start or EnumerationCursor()
    for length in range(max(start.length, 1), max_len + 1):
        alphabets = [position_alphabet(length, position, bounds) for position in range(length)]
        stream = itertools.product(*alphabets)
        first = start.index if length == start.length else 0
        if first:
            stream = itertools.islice(stream, first, None)
        for index, program in enumerate(stream, start=first):
            yield EnumerationCursor(length, index), program
