#!/usr/bin/env python3
"""
Fuel-metered bit-stack virtual machine

The machine reads a read-only input tape and a read-only hint, keeps
single-bit values on an operand stack and appends OUTPUT bits to its output.
The tape holds the input bits, then an end marker 1, then 0s up to the
declared input width, so an input x of at most w bits is seen as the
w+1 bit word x1000... and a program can find where x ends.
Every executed instruction costs one unit of fuel. Faults (reads past the
tape, stack underflow, running off the end of the code) are reported as a
trapped status and never raise.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import InputError, ProgramParseError

DEFAULT_MAX_STACK = 4096


class Opcode(IntEnum):
    """Instruction set; the numbering fixes the enumeration order"""
    PUSH0 = 0
    PUSH1 = 1
    READ_INPUT = 2
    READ_HINT = 3
    DUP = 4
    SWAP = 5
    POP = 6
    NOT = 7
    AND = 8
    OR = 9
    XOR = 10
    ADD = 11
    LT = 12
    JZ = 13
    JMP = 14
    OUTPUT = 15
    HALT = 16


OPERAND_OPCODES = frozenset({Opcode.READ_INPUT, Opcode.READ_HINT, Opcode.JZ, Opcode.JMP})
JUMP_OPCODES = frozenset({Opcode.JZ, Opcode.JMP})


class Instruction(NamedTuple):
    op: Opcode
    arg: int = 0

    def __str__(self) -> str:
        if self.op in OPERAND_OPCODES:
            return f"{self.op.name} {self.arg}"
        return self.op.name


Bytecode = Tuple[Instruction, ...]


def ins(op: Opcode, arg: int = 0) -> Instruction:
    return Instruction(Opcode(op), arg)


def check_bytecode(code: Sequence[Instruction], max_len: Optional[int] = None) -> Bytecode:
    """Validate jump targets and length; returns the code as a tuple"""
    code = tuple(Instruction(Opcode(i.op), int(i.arg)) for i in code)
    if not code:
        raise InputError("bytecode must contain at least one instruction")
    if max_len is not None and len(code) > max_len:
        raise InputError(f"bytecode has {len(code)} instructions, limit is {max_len}")
    for pc, instruction in enumerate(code):
        if instruction.op in JUMP_OPCODES and not 0 <= pc + instruction.arg < len(code):
            raise InputError(f"jump at {pc} targets {pc + instruction.arg}, outside the code")
        if instruction.op in (Opcode.READ_INPUT, Opcode.READ_HINT) and instruction.arg < 0:
            raise InputError(f"negative read index at {pc}")
    return code


def format_program(code: Sequence[Instruction]) -> str:
    """One uppercase mnemonic per line, decimal operands"""
    return "".join(f"{instruction}\n" for instruction in code)


def parse_program(text: str) -> Bytecode:
    """Inverse of format_program"""
    code = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            op = Opcode[parts[0]]
        except KeyError:
            raise ProgramParseError(f"unknown mnemonic {parts[0]!r}", line=number)
        if op in OPERAND_OPCODES:
            if len(parts) != 2:
                raise ProgramParseError(f"{op.name} takes one operand", line=number)
            try:
                arg = int(parts[1])
            except ValueError:
                raise ProgramParseError(f"operand {parts[1]!r} is not an integer", line=number)
        elif len(parts) != 1:
            raise ProgramParseError(f"{op.name} takes no operand", line=number)
        else:
            arg = 0
        code.append(Instruction(op, arg))
    try:
        return check_bytecode(code)
    except InputError as exc:
        raise ProgramParseError(str(exc))


@dataclass(frozen=True)
class Hint:
    """Per-size hint data; bits are read most significant first within a byte"""
    data: bytes = b""
    _bits: Tuple[int, ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        data = bytes(self.data)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "_bits", tuple((byte >> (7 - i)) & 1 for byte in data for i in range(8)))

    @property
    def size(self) -> int:
        return len(self.data)

    @property
    def bits(self) -> Tuple[int, ...]:
        return self._bits

    @classmethod
    def from_int(cls, value: int, size: int) -> "Hint":
        return cls(value.to_bytes(size, "big") if size else b"")


EMPTY_HINT = Hint()


class RunStatus(Enum):
    HALTED = "halted"
    FUEL_EXHAUSTED = "fuel-exhausted"
    TRAPPED = "trapped"


@dataclass(frozen=True)
class StateDigest:
    step: int
    digest: str
    top: Tuple[int, ...]


@dataclass(frozen=True)
class RunOutcome:
    status: RunStatus
    output: Optional[str]
    fuel_used: int
    fuel_granted: int
    digests: Tuple[StateDigest, ...] = ()
    trap: Optional[str] = None
    emitted: str = ""  # bits output before the run stopped, whatever the status

    @property
    def halted(self) -> bool:
        return self.status is RunStatus.HALTED


def _state_digest(step: int, pc: int, stack: List[int]) -> StateDigest:
    hasher = hashlib.blake2b(digest_size=8)
    hasher.update(pc.to_bytes(4, "big"))
    hasher.update(bytes(stack))
    return StateDigest(step, hasher.hexdigest(), tuple(stack[-4:]))


def input_tape(input_bits: str, input_width: Optional[int] = None) -> List[int]:
    """Input bits, the end marker and zero padding up to ``input_width``"""
    width = len(input_bits) if input_width is None else input_width
    if width < len(input_bits):
        raise InputError(f"input of {len(input_bits)} bits exceeds the declared width {width}")
    return [1 if ch == "1" else 0 for ch in input_bits] + [1] + [0] * (width - len(input_bits))


def run(code: Bytecode, hint: Hint, input_bits: str, fuel: int, snapshot_every: int = 0,
        output_limit: Optional[int] = None, max_stack: int = DEFAULT_MAX_STACK,
        input_width: Optional[int] = None) -> RunOutcome:
    """Execute at most ``fuel`` instructions

    With ``output_limit`` set the run also halts as soon as that many bits
    have been output. ``input_width`` is the declared maximum input length;
    READ_INPUT accepts indices up to it (the input length when omitted).
    """
    if fuel < 1:
        raise InputError("fuel must be at least 1")
    data = input_tape(input_bits, input_width)
    hint_bits = hint.bits
    stack: List[int] = []
    out: List[str] = []
    digests: List[StateDigest] = []
    pc = 0
    used = 0
    size = len(code)

    def trapped(reason: str) -> RunOutcome:
        return RunOutcome(RunStatus.TRAPPED, None, used, fuel, tuple(digests), reason, "".join(out))

    while True:
        if pc < 0 or pc >= size:
            return trapped(f"pc {pc} outside code")
        if used >= fuel:
            return RunOutcome(RunStatus.FUEL_EXHAUSTED, None, used, fuel, tuple(digests), emitted="".join(out))
        op, arg = code[pc]
        used += 1
        pc += 1

        if op <= Opcode.READ_HINT:
            if op == Opcode.PUSH0:
                stack.append(0)
            elif op == Opcode.PUSH1:
                stack.append(1)
            elif op == Opcode.READ_INPUT:
                if arg >= len(data):
                    return trapped(f"input index {arg} past the tape")
                stack.append(data[arg])
            else:
                if arg >= len(hint_bits):
                    return trapped(f"hint index {arg} out of range")
                stack.append(hint_bits[arg])
            if len(stack) > max_stack:
                return trapped("stack overflow")
        elif op == Opcode.DUP:
            if not stack:
                return trapped("stack underflow")
            stack.append(stack[-1])
            if len(stack) > max_stack:
                return trapped("stack overflow")
        elif op == Opcode.SWAP:
            if len(stack) < 2:
                return trapped("stack underflow")
            stack[-1], stack[-2] = stack[-2], stack[-1]
        elif op == Opcode.POP:
            if not stack:
                return trapped("stack underflow")
            stack.pop()
        elif op == Opcode.NOT:
            if not stack:
                return trapped("stack underflow")
            stack[-1] ^= 1
        elif op <= Opcode.LT:
            if len(stack) < 2:
                return trapped("stack underflow")
            b = stack.pop()
            a = stack.pop()
            if op == Opcode.AND:
                stack.append(a & b)
            elif op == Opcode.OR:
                stack.append(a | b)
            elif op == Opcode.LT:
                stack.append(1 if a < b else 0)
            else:
                # XOR and ADD coincide on single bits (carry dropped)
                stack.append(a ^ b)
        elif op == Opcode.JZ:
            if not stack:
                return trapped("stack underflow")
            if stack.pop() == 0:
                pc += arg - 1
        elif op == Opcode.JMP:
            pc += arg - 1
        elif op == Opcode.OUTPUT:
            if not stack:
                return trapped("stack underflow")
            out.append("1" if stack.pop() else "0")
            if output_limit is not None and len(out) >= output_limit:
                if snapshot_every and used % snapshot_every == 0:
                    digests.append(_state_digest(used, pc, stack))
                return RunOutcome(RunStatus.HALTED, "".join(out), used, fuel, tuple(digests), emitted="".join(out))
        else:
            if snapshot_every and used % snapshot_every == 0:
                digests.append(_state_digest(used, pc, stack))
            return RunOutcome(RunStatus.HALTED, "".join(out), used, fuel, tuple(digests), emitted="".join(out))

        if snapshot_every and used % snapshot_every == 0:
            digests.append(_state_digest(used, pc, stack))


@dataclass(frozen=True)
class RunSummary:
    """Fixed-size aggregate of one run"""
    status: RunStatus
    fuel_used: int
    fuel_granted: int
    output_hash: Optional[str]
    first_state: Optional[str]
    last_state: Optional[str]

    def to_dict(self) -> Dict[str, object]:
        return {
            "status": self.status.value,
            "fuel_used": self.fuel_used,
            "fuel_granted": self.fuel_granted,
            "output_hash": self.output_hash,
            "first_state": self.first_state,
            "last_state": self.last_state,
        }


def digest(outcome: RunOutcome) -> RunSummary:
    output_hash = None
    if outcome.output is not None:
        output_hash = hashlib.blake2b(outcome.output.encode("ascii"), digest_size=8).hexdigest()
    first = outcome.digests[0].digest if outcome.digests else None
    last = outcome.digests[-1].digest if outcome.digests else None
    return RunSummary(outcome.status, outcome.fuel_used, outcome.fuel_granted, output_hash, first, last)
