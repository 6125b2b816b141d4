#!/usr/bin/env python3
"""
Logging setup for the command line

Diagnostics go to stderr (and LOG_FILE when configured) so stdout only
carries results.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from ..config.settings import settings


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    level = (level or settings.LOG_LEVEL).upper()
    log_file = settings.LOG_FILE if log_file is None else log_file
    formatter = logging.Formatter(settings.LOG_FORMAT)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    root.addHandler(stream)
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
    root.setLevel(getattr(logging, level, logging.INFO))
    return root
