#!/usr/bin/env python3
"""
Problem pack registry

Each pack turns a family of problems into a ProblemStatement at a chosen
maximum input size. Packs that depend on randomness (the SAT mother
instance) take a seed; re-targeting to another size keeps the seed.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, Dict, Tuple

import gmpy2

from ..config.settings import settings
from .errors import UnknownPackError
from .kolmogorov import ProgramCatalog
from .problem import ProblemStatement, all_bit_strings, non_empty
from .sat import HARD_RATIO, Cnf3Instance, sat_generate, sat_truth_table, select_clauses
from .traces import GrowthFormula

logger = logging.getLogger(__name__)


def _decision(answer: bool) -> str:
    return "1" if answer else "0"


# parity / allones / firstbit

def _parity_verifier(bits: str, out: str) -> bool:
    return out == _decision(bits.count("1") % 2 == 1)


def _allones_verifier(bits: str, out: str) -> bool:
    return out == _decision(all(ch == "1" for ch in bits))


def _firstbit_verifier(bits: str, out: str) -> bool:
    return out == bits[:1]


def parity_problem(n0: int, seed: int = 0) -> ProblemStatement:
    return ProblemStatement(
        "parity", _parity_verifier, n0, resize=partial(parity_problem, seed=seed),
        description="1 iff the input has an odd number of ones",
    )


def allones_problem(n0: int, seed: int = 0) -> ProblemStatement:
    return ProblemStatement(
        "allones", _allones_verifier, n0, resize=partial(allones_problem, seed=seed),
        description="1 iff every input bit is 1 (the empty input included)",
    )


def firstbit_problem(n0: int, seed: int = 0) -> ProblemStatement:
    return ProblemStatement(
        "firstbit", _firstbit_verifier, n0, universe=non_empty,
        resize=partial(firstbit_problem, seed=seed),
        description="output the first input bit; inputs are non-empty",
    )


# sat: subset of a seeded mother instance

def mother_variables(clauses: int) -> int:
    """Variable count putting the mother near the hard clause density"""
    return max(3, round(clauses / HARD_RATIO))


@lru_cache(maxsize=64)
def mother_instance(clauses: int, seed: int) -> Cnf3Instance:
    return sat_generate(mother_variables(clauses), clauses, seed)


def _sat_verifier(mother: Cnf3Instance, bits: str, out: str) -> bool:
    return out == _decision(sat_truth_table(select_clauses(mother, bits)) is not None)


def sat_problem(n0: int, seed: int = 0) -> ProblemStatement:
    """Input bit i keeps clause i of the mother; the answer is satisfiability"""
    mother = mother_instance(max(n0, 1), seed)
    return ProblemStatement(
        "sat", partial(_sat_verifier, mother), n0, resize=partial(sat_problem, seed=seed),
        description=f"satisfiability of clause subsets of a {mother.n}-variable, {mother.m}-clause mother (seed {seed})",
    )


# kc: is the string compressible within the catalog bounds

@lru_cache(maxsize=16)
def shared_catalog(lengths: Tuple[int, ...], max_len: int, fuel: int) -> ProgramCatalog:
    return ProgramCatalog(max_len, fuel, lengths)


def _kc_verifier(catalog: ProgramCatalog, bits: str, out: str) -> bool:
    length = catalog.shortest_length(bits)
    return out == _decision(length is not None and length < 2 * len(bits))


def kc_problem(n0: int, seed: int = 0) -> ProblemStatement:
    catalog = shared_catalog(tuple(range(1, max(n0, 1) + 1)), settings.KC_MAX_PROGRAM_LEN, settings.KC_FUEL)
    return ProblemStatement(
        "kc", partial(_kc_verifier, catalog), n0, universe=non_empty,
        resize=partial(kc_problem, seed=seed),
        description="1 iff some output-only program shorter than the literal emitter produces the input",
    )


# factor: smallest prime factor of the input read as a binary number

def factor_width(n0: int) -> int:
    return max(1, math.ceil(n0 / 2))


def smallest_factor(value: int) -> int:
    """Smallest prime factor of a composite value, 0 for 0, 1 and primes"""
    if value < 4 or gmpy2.is_prime(value):
        return 0
    p = gmpy2.mpz(2)
    while value % p:
        p = gmpy2.next_prime(p)
    return int(p)


def _factor_verifier(bits: str, out: str) -> bool:
    return int(out, 2) == smallest_factor(int(bits or "0", 2))


def factor_problem(n0: int, seed: int = 0) -> ProblemStatement:
    return ProblemStatement(
        "factor", _factor_verifier, n0, universe=all_bit_strings,
        output_size=GrowthFormula.const(factor_width(n0)),
        resize=partial(factor_problem, seed=seed),
        description="smallest prime factor of the input as a binary number, 0 when it has none",
    )


@dataclass(frozen=True)
class Pack:
    name: str
    build: Callable[..., ProblemStatement]
    seeded: bool = False


PACKS: Dict[str, Pack] = {
    "sat": Pack("sat", sat_problem, seeded=True),
    "parity": Pack("parity", parity_problem),
    "allones": Pack("allones", allones_problem),
    "firstbit": Pack("firstbit", firstbit_problem),
    "kc": Pack("kc", kc_problem),
    "factor": Pack("factor", factor_problem),
}


def get_pack(name: str) -> Pack:
    try:
        return PACKS[name]
    except KeyError:
        raise UnknownPackError(f"unknown problem pack {name!r}; choose from {', '.join(sorted(PACKS))}")


def build_problem(name: str, n0: int, seed: int = 0) -> ProblemStatement:
    problem = get_pack(name).build(n0, seed=seed)
    logger.debug("Built %s problem at n0=%d", name, n0)
    return problem
