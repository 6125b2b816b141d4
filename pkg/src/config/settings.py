#!/usr/bin/env python3
"""
Configuration settings for finitekit
"""

import os
from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Workbench settings"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="FINITEKIT_",
        case_sensitive=True,
        extra="ignore",
    )

    # Project
    PROJECT_NAME: str = "finitekit"
    VERSION: str = "1.0.0"
    DESCRIPTION: str = "Finite algorithmics workbench"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # File storage
    OUTPUT_DIR: str = "outputs"
    CHECKPOINT_DIR: str = "outputs/checkpoints"

    # Parallelism (0 = available cores)
    WORKERS: int = 0

    # Interpreter
    DEFAULT_FUEL: int = 10_000
    SNAPSHOT_EVERY: int = 0

    # Complexity calculus
    POLY_RANK_CAP: int = 64
    EXP_RANK_MAX_DENOMINATOR: int = 16
    EXP_RANK_THRESHOLD: int = 8
    CONST_OFFSET_POLYLOG: int = 0
    CONST_OFFSET_POLY: int = 1
    CONST_OFFSET_SEMIPOLY: int = 1

    # Search
    PROGRAM_MAX_LEN: int = 4
    HINT_MAX_BYTES: int = 2
    SEARCH_TRIAL_BUDGET: int = 2_000_000
    SEARCH_MAX_INPUTS: int = 1 << 18
    LOOKUP_MEMORY_BUDGET_BYTES: int = 64 * 1024 * 1024
    BANDIT_EPSILON: float = 0.1
    BANDIT_EXPLORATION: float = 2.0
    CHECKPOINT_MAX_BYTES: int = 16 * 1024 * 1024
    DOUBLING_WINDOW: int = 5
    DOUBLING_MAX_STEPS: int = 6
    DOUBLING_PROGRAM_MAX_LEN: int = 3

    # Kolmogorov pack
    KC_MAX_PROGRAM_LEN: int = 4
    KC_FUEL: int = 256
    ATOM_SLACK: int = 3
    ATOM_MAX_BITS: int = 8
    KC_MAX_RECURSION: int = 4

    # Factorization pack
    TRIAL_DIVISION_BOUND: int = 100
    HARD_PRIME_PAIRINGS: int = 5
    HARD_PRIME_PERCENTILE: float = 90.0

    # Annex tables
    ANNEX_PRECISION_DIGITS: int = 50

    def resolved_workers(self) -> int:
        """Worker count with 0 meaning every available core"""
        if self.WORKERS > 0:
            return self.WORKERS
        return os.cpu_count() or 1


# Global settings instance
settings = Settings()


def ensure_directories():
    """Create output directories if they don't exist"""
    directories = [
        Path(settings.OUTPUT_DIR),
        Path(settings.CHECKPOINT_DIR),
    ]
    if settings.LOG_FILE:
        directories.append(Path(settings.LOG_FILE).parent)

    for directory in directories:
        directory.mkdir(parents=True, exist_ok=True)
