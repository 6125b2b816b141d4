#!/usr/bin/env python3
"""
UCB1 allocation over a growing set of arms

Arms are candidate ids added as the search discovers them. Untried arms are
pulled first; afterwards the arm maximising
value + sqrt(exploration * ln(total pulls) / pulls) wins, ties going to the
lowest id so that selection is a pure function of the statistics.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np


@dataclass
class UCB1:
    exploration: float = 2.0
    counts: Dict[int, int] = field(default_factory=dict)
    values: Dict[int, float] = field(default_factory=dict)

    @property
    def total_pulls(self) -> int:
        return sum(self.counts.values())

    def add_arm(self, arm: int) -> None:
        self.counts.setdefault(arm, 0)
        self.values.setdefault(arm, 0.0)

    def remove_arm(self, arm: int) -> None:
        self.counts.pop(arm, None)
        self.values.pop(arm, None)

    def scores(self, arms: Iterable[int]) -> np.ndarray:
        arms = sorted(arms)
        counts = np.array([self.counts.get(a, 0) for a in arms], dtype=np.float64)
        values = np.array([self.values.get(a, 0.0) for a in arms], dtype=np.float64)
        total = max(self.total_pulls, 1)
        with np.errstate(divide="ignore"):
            bonus = np.sqrt(self.exploration * np.log(total) / counts)
        return np.where(counts == 0, np.inf, values + bonus)

    def select(self, arms: Optional[Iterable[int]] = None) -> int:
        arms = sorted(self.counts if arms is None else arms)
        if not arms:
            raise ValueError("no arms to select from")
        for arm in arms:
            if self.counts.get(arm, 0) == 0:
                return arm
        return arms[int(np.argmax(self.scores(arms)))]

    def update(self, arm: int, reward: float) -> None:
        """Incremental mean update"""
        self.add_arm(arm)
        self.counts[arm] += 1
        self.values[arm] += (reward - self.values[arm]) / self.counts[arm]

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {
            "counts": {str(a): c for a, c in sorted(self.counts.items())},
            "values": {str(a): v for a, v in sorted(self.values.items())},
        }

    @classmethod
    def from_dict(cls, data, exploration: float = 2.0) -> "UCB1":
        return cls(
            exploration=exploration,
            counts={int(a): int(c) for a, c in data.get("counts", {}).items()},
            values={int(a): float(v) for a, v in data.get("values", {}).items()},
        )
