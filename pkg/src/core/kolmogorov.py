#!/usr/bin/env python3
"""
Bounded Kolmogorov complexity and atom-based compression

Strings are bit strings. A program "produces" s when, run without input or
hint and stopped as soon as |s| bits were output, its output is exactly s.
The reference encoding of s is the literal emitter: PUSH0/PUSH1 then OUTPUT
for every bit, 2|s| instructions.

Compression splits a string into atoms (substrings that do not compress by
more than a slack margin), stores atom indices, and then repeatedly replaces
the most frequent adjacent index pair while that keeps shrinking the stream.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..config.settings import settings
from .enumeration import OperandBounds, iter_programs
from .errors import IncompressibleSpanError, InputError
from .vm import EMPTY_HINT, Bytecode, Instruction, Opcode, run

logger = logging.getLogger(__name__)

MAX_TARGET_BITS = 128

BitsLike = Union[str, bytes]


def to_bits(s: BitsLike) -> str:
    if isinstance(s, (bytes, bytearray)):
        return "".join(format(byte, "08b") for byte in s)
    if any(ch not in "01" for ch in s):
        raise InputError("bit strings may only contain 0 and 1")
    return s


def pack_bits(bits: str) -> bytes:
    padded = bits + "0" * (-len(bits) % 8)
    return bytes(int(padded[i:i + 8], 2) for i in range(0, len(padded), 8))


def unpack_bits(data: bytes, length: int) -> str:
    return "".join(format(byte, "08b") for byte in data)[:length]


def literal_emitter(s: BitsLike) -> Bytecode:
    bits = to_bits(s)
    code = []
    for bit in bits:
        code.append(Instruction(Opcode.PUSH1 if bit == "1" else Opcode.PUSH0, 0))
        code.append(Instruction(Opcode.OUTPUT, 0))
    return tuple(code)


def emitted_stream(code: Bytecode, fuel: int, max_bits: int) -> str:
    """Bits the program outputs within ``fuel`` before stopping or reaching ``max_bits``"""
    return run(code, EMPTY_HINT, "", fuel, output_limit=max_bits).emitted


def produces(code: Bytecode, s: str, fuel: int) -> bool:
    outcome = run(code, EMPTY_HINT, "", fuel, output_limit=len(s))
    return outcome.halted and outcome.output == s


def kc_shortest(s: BitsLike, fuel: Optional[int] = None,
                max_len: Optional[int] = None) -> Optional[Tuple[Bytecode, int]]:
    """First program in canonical order that produces s; None within the bounds"""
    bits = to_bits(s)
    if not bits or len(bits) > MAX_TARGET_BITS:
        raise InputError(f"target must have 1..{MAX_TARGET_BITS} bits")
    fuel = settings.KC_FUEL if fuel is None else fuel
    max_len = settings.KC_MAX_PROGRAM_LEN if max_len is None else max_len
    for _, code in iter_programs(max_len, OperandBounds()):
        if produces(code, bits, fuel):
            return code, len(code)
    return None


def kc_estimate(s: BitsLike, fuel: Optional[int] = None, max_len: Optional[int] = None) -> Tuple[Bytecode, int]:
    """Shortest known program: the enumerated one when it exists, else the literal emitter"""
    found = kc_shortest(s, fuel, max_len)
    literal = literal_emitter(s)
    if found is not None and found[1] < len(literal):
        return found
    return literal, len(literal)


class ProgramCatalog:
    """One enumeration pass recording the first producer of every short string

    Only target lengths in ``lengths`` are indexed, so the index stays small.
    """

    def __init__(self, max_len: int, fuel: int, lengths: Iterable[int]):
        self.max_len = max_len
        self.fuel = fuel
        self.lengths = sorted(set(lengths))
        if not self.lengths or self.lengths[0] < 1:
            raise InputError("catalog lengths must be positive")
        self.shortest: Dict[str, Bytecode] = {}
        self.programs_run = 0
        self._build()

    def _build(self):
        top = self.lengths[-1]
        for _, code in iter_programs(self.max_len, OperandBounds()):
            self.programs_run += 1
            stream = emitted_stream(code, self.fuel, top)
            for k in self.lengths:
                if k > len(stream):
                    break
                self.shortest.setdefault(stream[:k], code)
        logger.info("Program catalog: %d programs up to length %d, %d strings indexed",
                    self.programs_run, self.max_len, len(self.shortest))

    def lookup(self, s: str) -> Optional[Bytecode]:
        if len(s) not in self.lengths:
            raise InputError(f"catalog does not index length {len(s)}")
        return self.shortest.get(s)

    def shortest_length(self, s: str) -> Optional[int]:
        code = self.lookup(s)
        return None if code is None else len(code)


def is_incompressible(s: str, slack: int, catalog: ProgramCatalog) -> bool:
    """No program shorter than the literal emitter by more than ``slack`` produces s"""
    length = catalog.shortest_length(s)
    return length is None or length > 2 * len(s) - slack - 1


@dataclass(frozen=True)
class CensusResult:
    bit_length: int
    compressible: int
    incompressible: int

    def to_dict(self) -> Dict[str, int]:
        return {"bit_length": self.bit_length, "compressible": self.compressible,
                "incompressible": self.incompressible}


def kc_census(bit_length: int, fuel: Optional[int] = None, max_len: Optional[int] = None,
              catalog: Optional[ProgramCatalog] = None) -> CensusResult:
    """Count strings of one length by whether some program beats their literal emitter"""
    if not 1 <= bit_length <= 12:
        raise InputError("census bit length must be in 1..12")
    if catalog is None:
        catalog = ProgramCatalog(settings.KC_MAX_PROGRAM_LEN if max_len is None else max_len,
                                 settings.KC_FUEL if fuel is None else fuel, [bit_length])
    compressible = 0
    for value in range(1 << bit_length):
        s = format(value, f"0{bit_length}b")
        length = catalog.shortest_length(s)
        if length is not None and length < 2 * bit_length:
            compressible += 1
    return CensusResult(bit_length, compressible, (1 << bit_length) - compressible)


@dataclass(frozen=True)
class AtomSet:
    """A split of a string into atoms; ``atoms`` lists each distinct atom once"""
    split: Tuple[str, ...]
    slack: int

    @property
    def atoms(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(self.split))

    def joined(self) -> str:
        return "".join(self.split)


def atoms(s: BitsLike, slack: Optional[int] = None, fuel: Optional[int] = None,
          max_atom_bits: Optional[int] = None, catalog: Optional[ProgramCatalog] = None) -> AtomSet:
    """Greedy left-to-right split into the longest incompressible-within-slack pieces"""
    bits = to_bits(s)
    slack = settings.ATOM_SLACK if slack is None else slack
    max_atom_bits = settings.ATOM_MAX_BITS if max_atom_bits is None else max_atom_bits
    if catalog is None:
        catalog = ProgramCatalog(settings.KC_MAX_PROGRAM_LEN, settings.KC_FUEL if fuel is None else fuel,
                                 range(1, max_atom_bits + 1))
    split = []
    pos = 0
    while pos < len(bits):
        longest = min(max_atom_bits, len(bits) - pos)
        for length in range(longest, 0, -1):
            piece = bits[pos:pos + length]
            if length == 1 or is_incompressible(piece, slack, catalog):
                break
        split.append(piece)
        pos += len(piece)
    return AtomSet(tuple(split), slack)


class _TrieNode:
    __slots__ = ("children", "index")

    def __init__(self):
        self.children: Dict[str, "_TrieNode"] = {}
        self.index: Optional[int] = None


class AtomTable:
    """Sorted atom dictionary with a trie for prefix matching"""

    def __init__(self, atom_list: Iterable[str]):
        self.atoms: List[str] = sorted(set(atom_list))
        if any(not atom for atom in self.atoms):
            raise InputError("atoms must be non-empty")
        self.positions = {atom: i for i, atom in enumerate(self.atoms)}
        self.root = _TrieNode()
        for i, atom in enumerate(self.atoms):
            node = self.root
            for bit in atom:
                node = node.children.setdefault(bit, _TrieNode())
            node.index = i

    def __len__(self) -> int:
        return len(self.atoms)

    def matches(self, bits: str, pos: int) -> List[int]:
        """Indices of atoms that are prefixes of bits[pos:], shortest first"""
        found = []
        node = self.root
        while pos < len(bits):
            node = node.children.get(bits[pos])
            if node is None:
                break
            pos += 1
            if node.index is not None:
                found.append(node.index)
        return found

    def to_bytes(self) -> bytes:
        """Front-coded: shared prefix length, suffix length, packed suffix bits"""
        blob = bytearray(struct.pack(">H", len(self.atoms)))
        previous = ""
        for atom in self.atoms:
            shared = 0
            while shared < min(len(previous), len(atom), 255) and previous[shared] == atom[shared]:
                shared += 1
            suffix = atom[shared:]
            if len(suffix) > 255:
                raise InputError("atoms are limited to 255 bits")
            blob += struct.pack(">BB", shared, len(suffix))
            blob += pack_bits(suffix)
            previous = atom
        return bytes(blob)

    @classmethod
    def from_bytes(cls, data: bytes) -> "AtomTable":
        (count,) = struct.unpack_from(">H", data, 0)
        pos = 2
        previous = ""
        result = []
        for _ in range(count):
            shared, length = struct.unpack_from(">BB", data, pos)
            pos += 2
            size = (length + 7) // 8
            suffix = unpack_bits(data[pos:pos + size], length)
            pos += size
            atom = previous[:shared] + suffix
            result.append(atom)
            previous = atom
        return cls(result)


DIGEST_HEADER = struct.Struct(">BHHH")


@dataclass(frozen=True)
class Digest:
    indices: Tuple[int, ...]
    rules: Tuple[Tuple[int, int], ...] = ()
    depth: int = 0
    residual: str = ""

    def to_bytes(self) -> bytes:
        blob = bytearray(DIGEST_HEADER.pack(self.depth, len(self.rules), len(self.indices), len(self.residual)))
        for left, right in self.rules:
            blob += struct.pack(">HH", left, right)
        for index in self.indices:
            blob += struct.pack(">H", index)
        blob += pack_bits(self.residual)
        return bytes(blob)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Digest":
        depth, n_rules, n_indices, residual_bits = DIGEST_HEADER.unpack_from(data, 0)
        pos = DIGEST_HEADER.size
        rules = []
        for _ in range(n_rules):
            rules.append(struct.unpack_from(">HH", data, pos))
            pos += 4
        indices = []
        for _ in range(n_indices):
            indices.append(struct.unpack_from(">H", data, pos)[0])
            pos += 2
        residual = unpack_bits(data[pos:], residual_bits)
        return cls(tuple(indices), tuple(tuple(r) for r in rules), depth, residual)


def _split_indices(bits: str, table: AtomTable, strict: bool) -> Tuple[List[int], str]:
    """Fewest-atoms cover of bits (longest first atom on ties)"""
    size = len(bits)
    best: List[Optional[Tuple[int, int]]] = [None] * (size + 1)
    best[size] = (0, -1)
    for pos in range(size - 1, -1, -1):
        for index in reversed(table.matches(bits, pos)):
            end = pos + len(table.atoms[index])
            if best[end] is not None and (best[pos] is None or best[end][0] + 1 < best[pos][0]):
                best[pos] = (best[end][0] + 1, index)
    indices = []
    pos = 0
    while pos < size:
        if best[pos] is None:
            if strict:
                raise IncompressibleSpanError(pos)
            return indices, bits[pos:]
        index = best[pos][1]
        indices.append(index)
        pos += len(table.atoms[index])
    return indices, ""


def _replace_pair(stream: List[int], pair: Tuple[int, int], symbol: int) -> List[int]:
    out = []
    i = 0
    while i < len(stream):
        if i + 1 < len(stream) and (stream[i], stream[i + 1]) == pair:
            out.append(symbol)
            i += 2
        else:
            out.append(stream[i])
            i += 1
    return out


def _most_frequent_pair(stream: Sequence[int]) -> Optional[Tuple[Tuple[int, int], int]]:
    counts: Dict[Tuple[int, int], int] = {}
    i = 0
    previous = None
    while i + 1 < len(stream):
        pair = (stream[i], stream[i + 1])
        # overlapping runs like a,a,a count once per non-overlapping occurrence
        if pair == previous and stream[i] == stream[i + 1]:
            previous = None
            i += 1
            continue
        counts[pair] = counts.get(pair, 0) + 1
        previous = pair
        i += 1
    if not counts:
        return None
    pair, count = min(counts.items(), key=lambda item: (-item[1], item[0]))
    return pair, count


def kc_compress(s: BitsLike, table: AtomTable, max_recursion: Optional[int] = None,
                strict: bool = True) -> Digest:
    """Atom indices of s, then pair replacement on the index stream while it shrinks"""
    bits = to_bits(s)
    max_recursion = settings.KC_MAX_RECURSION if max_recursion is None else max_recursion
    stream, residual = _split_indices(bits, table, strict)
    rules: List[Tuple[int, int]] = []
    depth = 0
    while depth < max_recursion:
        found = _most_frequent_pair(stream)
        if found is None or found[1] < 2:
            break
        pair, _ = found
        symbol = len(table) + len(rules)
        shorter = _replace_pair(stream, pair, symbol)
        if len(shorter) >= len(stream):
            break
        rules.append(pair)
        stream = shorter
        depth += 1
    return Digest(tuple(stream), tuple(rules), depth, residual)


def kc_decompress(digest: Digest, table: AtomTable) -> str:
    base = len(table)

    def expand(symbol: int) -> str:
        if symbol < base:
            return table.atoms[symbol]
        left, right = digest.rules[symbol - base]
        return expand(left) + expand(right)

    return "".join(expand(symbol) for symbol in digest.indices) + digest.residual
