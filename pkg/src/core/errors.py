#!/usr/bin/env python3
"""
Exception hierarchy for finitekit

Every error raised by the core carries an ``exit_code`` that the CLI maps
straight onto the process status: 2 for bad input, 3 for an exhausted budget,
1 for anything else.
"""

from typing import Any, Optional


class FiniteKitError(Exception):
    """Base class for all workbench errors"""

    exit_code = 1


class InputError(FiniteKitError):
    """Input rejected before any computation"""

    exit_code = 2


class BudgetError(FiniteKitError):
    """A resource budget ran out"""

    exit_code = 3


# Complexity calculus

class TraceValidationError(InputError):
    def __init__(self, message: str, line: Optional[int] = None, n: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.n = n


class CoverageError(InputError):
    def __init__(self, n: int):
        super().__init__(f"trace does not cover n={n}")
        self.n = n


class RankOverflowError(FiniteKitError):
    def __init__(self, cap: int):
        super().__init__(f"no rank found up to cap {cap}")
        self.cap = cap


class UnsupportedCombinationError(InputError):
    pass


# Virtual machine

class FamilyViolationError(InputError):
    def __init__(self, violations):
        summary = "; ".join(str(v) for v in violations)
        super().__init__(f"program family constraints violated: {summary}")
        self.violations = list(violations)


class CompileError(InputError):
    pass


class ProgramParseError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EnumerationExhausted(FiniteKitError):
    pass


# Search

class MemoryBudgetError(BudgetError):
    pass


class InconsistentProblemError(InputError):
    def __init__(self, problem: str, input_bits: str):
        super().__init__(f"{problem}: verifier rejects every output for input {input_bits!r}")
        self.input_bits = input_bits


class NoOutputError(FiniteKitError):
    pass


class BudgetExceededError(BudgetError):
    """Search budget ran out; carries what was found so far and where to resume"""

    def __init__(self, message: str, best: Any = None, cursor: Any = None):
        super().__init__(message)
        self.best = best
        self.cursor = cursor


class SearchExhaustedError(FiniteKitError):
    pass


# Problem packs

class SatInputError(InputError):
    pass


class IncompressibleSpanError(InputError):
    def __init__(self, position: int):
        super().__init__(f"no atom covers the span starting at bit {position}")
        self.position = position


class FactorInputError(InputError):
    pass


class EmptyRangeError(InputError):
    pass


class UnknownPackError(InputError):
    pass


# Annex

class ProfileError(InputError):
    pass
