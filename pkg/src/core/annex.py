#!/usr/bin/env python3
"""
Maximum tractable input size per finite complexity class

For a hardware profile and a wall-clock duration the operation budget is
rate x cores x seconds. Each class has a cost model and the table cell is
the largest n whose cost fits the budget. Cost models use base e:

    Exp       e^n
    SemiPoly  n^(1 + ln n)
    Poly      n^(1 + ln ln n)
    Quadric   n^2
    Linear    n          (PolyLog shares this table)
"""

import io
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import pandas as pd
import xlsxwriter

from ..config.settings import settings
from .errors import InputError, ProfileError, UnsupportedCombinationError

logger = logging.getLogger(__name__)

COST_MODEL_NOTE = (
    "Cost models use natural logarithms and e^n; the class definitions use base 2, "
    "the printed reference cells only fit base e."
)

CSV_COLUMNS = ["class", "duration_seconds", "profile", "budget_ops", "max_n"]


class ClassKind(Enum):
    EXP = "Exp"
    SEMIPOLY = "SemiPoly"
    POLY = "Poly"
    QUADRIC = "Quadric"
    LINEAR = "Linear"

    @classmethod
    def parse(cls, text: str) -> "ClassKind":
        aliases = {"exprank=1": cls.EXP, "polylog": cls.LINEAR}
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise UnsupportedCombinationError(f"no cost model for class {text!r}")


@dataclass(frozen=True)
class HardwareProfile:
    label: str
    rate: Fraction
    cores: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rate", Fraction(self.rate))
        if self.rate <= 0:
            raise ProfileError(f"profile {self.label}: rate must be positive")
        if self.cores < 1:
            raise ProfileError(f"profile {self.label}: needs at least one core")


PROFILES: Dict[str, HardwareProfile] = {
    "SCC": HardwareProfile("SCC", Fraction(10 ** 7), 1),
    "SCS": HardwareProfile("SCS", Fraction(83 * 10 ** 12), 1),
    "MCT": HardwareProfile("MCT", Fraction(83 * 10 ** 12), 2 * 10 ** 6),
    "MCA": HardwareProfile("MCA", Fraction(83 * 10 ** 12), 6 * 10 ** 7),
}

DAY = 24 * 3600
DURATIONS: List[Tuple[str, int]] = [
    ("1 second", 1),
    ("1 minute", 60),
    ("1 hour", 3600),
    ("1 month", 30 * DAY),
    ("1 year", 365 * DAY),
    ("10 years", 10 * 365 * DAY),
    ("100 years", 100 * 365 * DAY),
]


def parse_profile(text: str) -> HardwareProfile:
    """A preset label or ``custom:<ops per second>:<cores>``"""
    if text.upper() in PROFILES:
        return PROFILES[text.upper()]
    parts = text.split(":")
    if len(parts) != 3 or parts[0] != "custom":
        raise ProfileError(f"unknown profile {text!r}; use SCC, SCS, MCT, MCA or custom:<rate>:<cores>")
    try:
        rate = Fraction(parts[1])
        cores = int(parts[2])
    except (ValueError, ZeroDivisionError):
        raise ProfileError(f"malformed custom profile {text!r}")
    return HardwareProfile(text, rate, cores)


def budget(profile: HardwareProfile, seconds: int) -> int:
    """rate x cores x seconds, rounded down when a custom rate is fractional"""
    if seconds < 1:
        raise InputError("duration must be at least one second")
    return math.floor(profile.rate * profile.cores * seconds)


def _log_cost(kind: ClassKind, n: int):
    ln_n = mpmath.log(n)
    if kind is ClassKind.EXP:
        return mpmath.mpf(n)
    if kind is ClassKind.SEMIPOLY:
        return (1 + ln_n) * ln_n
    if kind is ClassKind.POLY:
        if n < 2:
            return mpmath.mpf(0)
        return (1 + mpmath.log(ln_n)) * ln_n
    if kind is ClassKind.QUADRIC:
        return 2 * ln_n
    return ln_n


def max_tractable(kind: ClassKind, ops: int, digits: Optional[int] = None) -> int:
    """Largest n with cost(n) <= ops"""
    if ops < 2:
        raise InputError("budget must be at least 2 operations")
    if kind is ClassKind.LINEAR:
        return ops
    if kind is ClassKind.QUADRIC:
        return math.isqrt(ops)
    digits = settings.ANNEX_PRECISION_DIGITS if digits is None else digits
    with mpmath.workdps(digits):
        limit = mpmath.log(ops)

        def fits(n: int) -> bool:
            return _log_cost(kind, n) <= limit

        lo, hi = 1, 2
        while fits(hi):
            lo, hi = hi, hi * 2
        # fits(lo) and not fits(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if fits(mid):
                lo = mid
            else:
                hi = mid
    return lo


@dataclass(frozen=True)
class BudgetCell:
    kind: ClassKind
    duration: str
    seconds: int
    profile: str
    budget: int
    max_n: int

    def to_dict(self):
        return {
            "class": self.kind.value,
            "duration_seconds": self.seconds,
            "profile": self.profile,
            "budget_ops": str(self.budget),
            "max_n": str(self.max_n),
        }


def compute_cells(profiles: Sequence[HardwareProfile], durations: Sequence[Tuple[str, int]] = DURATIONS,
                  kinds: Sequence[ClassKind] = tuple(ClassKind), divide_exp_by: int = 1) -> List[BudgetCell]:
    if divide_exp_by < 1:
        raise InputError("divide_exp_by must be positive")
    cells = []
    for kind in kinds:
        for label, seconds in durations:
            for profile in profiles:
                ops = budget(profile, seconds)
                n = max_tractable(kind, ops)
                if kind is ClassKind.EXP:
                    n //= divide_exp_by
                cells.append(BudgetCell(kind, label, seconds, profile.label, ops, n))
    return cells


def order_of_magnitude(value: int) -> str:
    return f"10^{len(str(value)) - 1}"


def short_number(value: int) -> str:
    """Three significant digits with a power-of-ten suffix from 10^4 up"""
    if value < 10_000:
        return str(value)
    magnitude = len(str(value))
    rounded = round(value, 3 - magnitude)
    exponent = (magnitude - 1) // 3 * 3
    return f"{float(Fraction(rounded, 10 ** exponent)):g}*10^{exponent}"


@dataclass
class AnnexTables:
    cells: List[BudgetCell]
    divide_exp_by: int = 1

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.to_dict() for cell in self.cells], columns=CSV_COLUMNS)

    def pivot(self, kind: ClassKind) -> pd.DataFrame:
        """Durations down, profiles across, cells as printed"""
        rows: Dict[str, Dict[str, str]] = {}
        profiles: List[str] = []
        for cell in self.cells:
            if cell.kind is not kind:
                continue
            if cell.profile not in profiles:
                profiles.append(cell.profile)
            text = order_of_magnitude(cell.max_n) if kind is ClassKind.LINEAR else short_number(cell.max_n)
            rows.setdefault(cell.duration, {})[cell.profile] = text
        table = pd.DataFrame.from_dict(rows, orient="index", columns=profiles)
        table.index.name = kind.value
        return table

    @property
    def kinds(self) -> List[ClassKind]:
        return list(dict.fromkeys(cell.kind for cell in self.cells))

    def to_csv(self) -> str:
        return self.frame().to_csv(index=False)

    def to_json_lines(self) -> str:
        return "".join(json.dumps(cell.to_dict(), sort_keys=True) + "\n" for cell in self.cells)

    def to_text(self) -> str:
        out = io.StringIO()
        for kind in self.kinds:
            title = "ExpRank = 1" if kind is ClassKind.EXP else kind.value
            if kind is ClassKind.EXP and self.divide_exp_by > 1:
                title += f" (divided by {self.divide_exp_by})"
            if kind is ClassKind.LINEAR:
                title += " / PolyLog"
            out.write(title + "\n")
            out.write(self.pivot(kind).to_string(index_names=False) + "\n\n")
        out.write(COST_MODEL_NOTE + "\n")
        return out.getvalue()

    def to_xlsx(self, path: Path) -> Path:
        """One worksheet per class table"""
        path = Path(path)
        workbook = xlsxwriter.Workbook(str(path))
        header_format = workbook.add_format({"bold": True, "bg_color": "#4472C4", "font_color": "white", "border": 1})
        data_format = workbook.add_format({"border": 1, "align": "right"})
        for kind in self.kinds:
            table = self.pivot(kind)
            worksheet = workbook.add_worksheet(kind.value)
            worksheet.write(0, 0, kind.value, header_format)
            for col, profile in enumerate(table.columns, start=1):
                worksheet.write(0, col, profile, header_format)
            for row, (duration, values) in enumerate(table.iterrows(), start=1):
                worksheet.write(row, 0, duration, header_format)
                for col, value in enumerate(values, start=1):
                    worksheet.write(row, col, value, data_format)
            worksheet.set_column(0, len(table.columns), 14)
        notes = workbook.add_worksheet("Notes")
        notes.write(0, 0, COST_MODEL_NOTE)
        workbook.close()
        logger.info("Wrote annex workbook %s", path)
        return path


def render_tables(profiles: Optional[Sequence[HardwareProfile]] = None,
                  durations: Sequence[Tuple[str, int]] = DURATIONS, divide_exp_by: int = 1) -> AnnexTables:
    profiles = list(PROFILES.values()) if profiles is None else list(profiles)
    return AnnexTables(compute_cells(profiles, durations, divide_exp_by=divide_exp_by), divide_exp_by)
