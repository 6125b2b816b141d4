#!/usr/bin/env python3
"""
finitekit command line

Results go to stdout (JSON lines by default); diagnostics go to stderr.
Exit codes: 0 success, 2 input error, 3 budget exhausted, 1 anything else.
"""

import argparse
import logging
import sys
from typing import List, Optional, Sequence, TextIO

import pandas as pd
from pydantic import ValidationError

from ..config.settings import settings
from ..core.errors import FiniteKitError, InputError
from ..utils.logging_config import configure_logging
from ..utils.reporting import write_reports
from .commands import COMMANDS, CommandConfig, CommandResult

logger = logging.getLogger(__name__)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "csv", "text"], default="json")
    parser.add_argument("--output", help="output file or directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--fuel", type=int, help="instruction budget per run")
    parser.add_argument("--workers", type=int, help=f"worker processes (env {settings.model_config['env_prefix']}WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finitekit", description=settings.DESCRIPTION)
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    classify = sub.add_parser("classify", help="classify a runtime trace")
    classify.add_argument("inputs", nargs=1, metavar="TRACE")
    classify.add_argument("--range", help="n1..n0")

    for name, help_text in (("explode", "first size leaving a class"), ("collapse", "size from which a class holds")):
        scan = sub.add_parser(name, help=help_text)
        scan.add_argument("inputs", nargs=1, metavar="TRACE")
        scan.add_argument("--level", required=True)
        scan.add_argument("--n1", type=int, required=True)
        _common(scan)

    for name, help_text in (("search", "bandit search for an adequate hinted program"),
                            ("lookup", "build the exhaustive lookup hint"),
                            ("doubling", "optimal search at doubling sizes")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("pack")
        cmd.add_argument("--n0", type=int, default=4)
        cmd.add_argument("--program-max-len", type=int)
        cmd.add_argument("--hint-max-bytes", type=int)
        if name == "search":
            cmd.add_argument("--steps", type=int, default=1000)
            cmd.add_argument("--checkpoint")
            cmd.add_argument("--resume")
        if name == "doubling":
            cmd.add_argument("--n-start", type=int, default=2)
            cmd.add_argument("--window", type=int)
            cmd.add_argument("--max-doublings", type=int)
        _common(cmd)

    annex = sub.add_parser("annex", help="maximum tractable size tables")
    annex.add_argument("--profile", dest="profiles", action="append", default=[],
                       help="SCC, SCS, MCT, MCA or custom:<rate>:<cores>; repeatable")
    annex.add_argument("--divide-exp-by", type=int, default=1)
    annex.add_argument("--divide-exp-by-8", dest="divide_exp_by", action="store_const", const=8)
    annex.add_argument("--xlsx")

    census = sub.add_parser("census", help="count compressible strings per bit length")
    census.add_argument("--bit-length", dest="bit_lengths", type=int, action="append", default=[])
    census.add_argument("--max-len", type=int)

    mine = sub.add_parser("mine", help="mine hard primes")
    mine.add_argument("--lo", type=int, default=2)
    mine.add_argument("--hi", type=int, default=1 << 12)
    mine.add_argument("--budget", type=int, default=2000)

    classify_like = (classify, annex, census, mine)
    for cmd in classify_like:
        _common(cmd)
    return parser


def _config(args: argparse.Namespace) -> CommandConfig:
    values = {k: v for k, v in vars(args).items() if k != "log_level" and v is not None}
    return CommandConfig(**values)


def emit(result: CommandResult, fmt: str, out: TextIO) -> None:
    if fmt == "text":
        out.write(result.text)
    elif fmt == "csv":
        table = result.table
        if table is None:
            table = pd.json_normalize([r.to_dict() for r in result.reports])
        out.write(table.to_csv(index=False))
    else:
        write_reports(result.reports, out)


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = _config(args)
        result = COMMANDS[config.command](config)
    except ValidationError as exc:
        logger.error("invalid arguments: %s", exc)
        return InputError.exit_code
    except FiniteKitError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        cursor = getattr(exc, "cursor", None)
        if cursor is not None:
            logger.error("resume cursor: %s", cursor)
        return exc.exit_code
    emit(result, config.format, out)
    return result.exit_code


def run(argv: List[str] = None) -> None:
    sys.exit(main(argv))
