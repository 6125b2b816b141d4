#!/usr/bin/env python3
"""
Subcommand implementations

Every command takes a validated CommandConfig and returns a CommandResult;
main.py owns argument parsing, output formatting and exit codes.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from ..config.settings import ensure_directories, settings
from ..core.annex import PROFILES, parse_profile, render_tables
from ..core.complexity import Level, classify
from ..core.errors import BudgetExceededError, InputError
from ..core.factorization import mine_hard_primes
from ..core.kolmogorov import kc_census
from ..core.lookup import LookupSolver, build_lookup_hint
from ..core.optimal_search import doubling_search
from ..core.packs import build_problem, get_pack
from ..core.problem import goldens_from_oracle
from ..core.search_loop import (
    Candidate, HintStrategy, SearchConfig, SearchState, evaluate, load_checkpoint, run_search, save_checkpoint,
)
from ..core.thresholds import collapse, explode
from ..core.traces import Range
from ..core.vm import format_program
from ..utils.reporting import Report
from ..utils.trace_io import read_trace_csv

logger = logging.getLogger(__name__)

SEEDED_COMMANDS = {"search", "mine"}


class CommandConfig(BaseModel):
    """Validated knobs of one invocation"""
    model_config = ConfigDict(extra="forbid")

    command: str
    inputs: List[str] = []
    output: Optional[str] = None
    seed: Optional[int] = None
    fuel: Optional[int] = None
    format: Literal["json", "csv", "text"] = "json"
    workers: Optional[int] = None

    range: Optional[str] = None
    level: Optional[str] = None
    n1: Optional[int] = None

    pack: Optional[str] = None
    n0: Optional[int] = None
    steps: int = 1000
    checkpoint: Optional[str] = None
    resume: Optional[str] = None
    n_start: int = 2
    window: Optional[int] = None
    max_doublings: Optional[int] = None
    program_max_len: Optional[int] = None
    hint_max_bytes: Optional[int] = None

    profiles: List[str] = []
    divide_exp_by: int = 1
    xlsx: Optional[str] = None

    bit_lengths: List[int] = []
    max_len: Optional[int] = None

    lo: int = 2
    hi: int = 1 << 12
    budget: int = 2000

    @model_validator(mode="after")
    def _check(self) -> "CommandConfig":
        seeded = self.command in SEEDED_COMMANDS or (self.pack is not None and get_pack(self.pack).seeded)
        if seeded and self.seed is None and self.resume is None:
            raise ValueError(f"{self.command} needs --seed")
        if self.fuel is not None and self.fuel < 1:
            raise ValueError("--fuel must be positive")
        return self

    @property
    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else settings.resolved_workers()

    @property
    def resolved_fuel(self) -> int:
        return self.fuel if self.fuel is not None else settings.DEFAULT_FUEL


@dataclass
class CommandResult:
    reports: List[Report] = field(default_factory=list)
    table: Optional[pd.DataFrame] = None
    text: str = ""
    exit_code: int = 0


def _single_input(config: CommandConfig) -> str:
    if len(config.inputs) != 1:
        raise InputError(f"{config.command} takes exactly one input file")
    return config.inputs[0]


def _output_dir(config: CommandConfig) -> Path:
    ensure_directories()
    path = Path(config.output or settings.OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


# Complexity

def cmd_classify(config: CommandConfig) -> CommandResult:
    path = _single_input(config)
    trace = read_trace_csv(path)
    rng = Range.parse(config.range) if config.range else Range(trace.base, trace.end)
    label = classify(trace, rng)
    report = Report("classify", {"trace": path, "range": str(rng)}, label.describe(), label.to_dict())
    return CommandResult([report], text=label.describe() + "\n")


def _threshold(config: CommandConfig, scan: Callable) -> CommandResult:
    path = _single_input(config)
    if config.level is None or config.n1 is None:
        raise InputError(f"{config.command} needs --level and --n1")
    trace = read_trace_csv(path)
    level = Level.parse(config.level)
    result = scan(trace, level, config.n1, workers=config.resolved_workers)
    report = Report(config.command, {"trace": path, "level": level.label, "n1": config.n1},
                    result.z, result.to_dict())
    text = f"{config.command} {level.label} from n1={config.n1}: {result.z if result.found else 'none'}\n"
    return CommandResult([report], text=text)


def cmd_explode(config: CommandConfig) -> CommandResult:
    return _threshold(config, explode)


def cmd_collapse(config: CommandConfig) -> CommandResult:
    return _threshold(config, collapse)


# Search

def _problem(config: CommandConfig):
    if config.pack is None or config.n0 is None:
        raise InputError(f"{config.command} needs a pack and --n0")
    return build_problem(config.pack, config.n0, seed=config.seed or 0)


def cmd_search(config: CommandConfig) -> CommandResult:
    if config.resume:
        state, name = load_checkpoint(Path(config.resume))
        if config.pack is not None and config.pack != name:
            raise InputError(f"checkpoint belongs to pack {name!r}, not {config.pack!r}")
        config = config.model_copy(update={"pack": name, "seed": state.seed})
    else:
        search_config = SearchConfig.from_settings()
        overrides = {}
        if config.program_max_len is not None:
            overrides["program_max_len"] = config.program_max_len
        if config.hint_max_bytes is not None:
            overrides["hint_max_bytes"] = config.hint_max_bytes
        if overrides:
            search_config = dataclasses.replace(search_config, **overrides)
        state = SearchState(seed=config.seed or 0, config=search_config)
    problem = _problem(config)
    goldens = goldens_from_oracle(problem)
    state = run_search(problem, goldens, config.steps, config.resolved_fuel, state=state)

    checkpoint_path = Path(config.checkpoint) if config.checkpoint else None
    top = max(len(d.input) for d in goldens)
    entry = state.adequate.get(top)
    inputs = {"pack": config.pack, "n0": config.n0, "seed": state.seed, "steps": state.step}
    if entry is None:
        if checkpoint_path is None:
            ensure_directories()
            checkpoint_path = Path(settings.CHECKPOINT_DIR) / f"{config.pack}-n0{config.n0}-seed{state.seed}.json"
        save_checkpoint(state, config.pack, checkpoint_path)
        logger.warning("No adequate pair for size %d after %d steps; resume from %s",
                       top, state.step, checkpoint_path)
        report = Report("search", inputs, None, {
            "adequate_sizes": sorted(state.adequate), "checkpoint": str(checkpoint_path),
        })
        return CommandResult([report], text=f"budget exhausted; resume with --resume {checkpoint_path}\n",
                             exit_code=BudgetExceededError.exit_code)
    if checkpoint_path is not None:
        save_checkpoint(state, config.pack, checkpoint_path)

    record = evaluate(Candidate(entry.candidate_id, entry.program, HintStrategy.NONE, entry.hint),
                      goldens, config.resolved_fuel)
    out = _output_dir(config)
    stem = f"{config.pack}-n0{config.n0}"
    program_path = out / f"{stem}.program"
    hint_path = out / f"{stem}.hint"
    program_path.write_text(format_program(entry.program))
    hint_path.write_bytes(entry.hint.data)
    witness = {
        "program": str(program_path),
        "hint": str(hint_path),
        "worst_fuel": entry.worst_fuel,
        "eval": record.to_dict(),
        "strategies": dict(sorted(state.strategy_counts.items())),
    }
    if checkpoint_path is not None:
        witness["checkpoint"] = str(checkpoint_path)
    report = Report("search", inputs, "adequate", witness)
    return CommandResult([report], text=f"adequate pair found at step {state.step}\n")


def cmd_lookup(config: CommandConfig) -> CommandResult:
    problem = _problem(config)
    hint, program = build_lookup_hint(problem)
    solver = LookupSolver(hint)
    probes = 0
    correct = 0
    inputs = problem.inputs()
    for bits in inputs:
        output, used = solver.query(bits)
        probes = max(probes, used)
        correct += int(output is not None and problem.verifier(bits, output))
    out = _output_dir(config)
    hint_path = out / f"{config.pack}-n0{config.n0}.hint"
    hint_path.write_bytes(hint.data)
    report = Report("lookup", {"pack": config.pack, "n0": config.n0}, solver.count, {
        "hint": str(hint_path),
        "hint_bytes": hint.size,
        "max_probes": probes,
        "correct": correct,
        "inputs": len(inputs),
        "program": program.text().strip(),
    })
    return CommandResult([report], text=f"{solver.count} entries, {hint.size} bytes, at most {probes} probes\n")


def cmd_doubling(config: CommandConfig) -> CommandResult:
    problem = _problem(config)
    result = doubling_search(
        problem, config.n_start, stability_window=config.window, max_doublings=config.max_doublings,
        program_max_len=config.program_max_len, hint_max_bytes=config.hint_max_bytes or 0,
        fuel_cap=config.fuel,
    )
    exhausted = result.stop_reason.startswith("budget exhausted")
    payload = result.to_dict()
    out = _output_dir(config)
    history_path = out / f"{config.pack}-doubling.json"
    history_path.write_text(json.dumps(payload, indent=2))
    payload["history_file"] = str(history_path)
    winner = result.winner
    if winner is not None:
        stem = f"{config.pack}-doubling-n{result.history[-1].n}"
        program_path = out / f"{stem}.program"
        hint_path = out / f"{stem}.hint"
        program_path.write_text(winner.program.text())
        hint_path.write_bytes(winner.hint.data)
        payload["program_file"] = str(program_path)
        payload["hint_file"] = str(hint_path)
    report = Report("doubling", {"pack": config.pack, "n_start": config.n_start, "window": config.window},
                    result.stable, payload)
    lines = [f"n={step.n}: {step.winner.identity().strip() if step.winner else '-'}"
             f" (fuel {step.winner.worst_fuel if step.winner else '-'}, class {step.level.label if step.level else '-'})"
             for step in result.history]
    text = "\n".join(lines + [f"stable: {result.stable} ({result.stop_reason})", result.note]) + "\n"
    code = BudgetExceededError.exit_code if exhausted else 0
    return CommandResult([report], text=text, exit_code=code)


# Annex and packs

def cmd_annex(config: CommandConfig) -> CommandResult:
    profiles = [parse_profile(p) for p in config.profiles] if config.profiles else list(PROFILES.values())
    tables = render_tables(profiles, divide_exp_by=config.divide_exp_by)
    if config.xlsx:
        tables.to_xlsx(Path(config.xlsx))
    reports = [Report("annex", {"profile": c.profile, "duration_seconds": c.seconds, "class": c.kind.value},
                      str(c.max_n), {"budget_ops": str(c.budget)}) for c in tables.cells]
    return CommandResult(reports, table=tables.frame(), text=tables.to_text())


def cmd_census(config: CommandConfig) -> CommandResult:
    lengths = config.bit_lengths or list(range(6, 11))
    results = [kc_census(k, fuel=config.fuel, max_len=config.max_len) for k in lengths]
    reports = [Report("census", {"bit_length": r.bit_length}, r.to_dict()) for r in results]
    table = pd.DataFrame([r.to_dict() for r in results])
    return CommandResult(reports, table=table, text=table.to_string(index=False) + "\n")


def cmd_mine(config: CommandConfig) -> CommandResult:
    hard = mine_hard_primes(config.lo, config.hi, config.budget, config.seed, workers=config.resolved_workers)
    witness = {"threshold": hard.threshold, "step_budget": hard.step_budget, "range": [config.lo, config.hi]}
    if config.output:
        witness["list"] = str(hard.save(Path(config.output)))
    report = Report("mine", {"lo": config.lo, "hi": config.hi, "budget": config.budget, "seed": config.seed},
                    list(hard.primes), witness)
    return CommandResult([report], table=hard.statistics, text=hard.to_text())


COMMANDS: Dict[str, Callable[[CommandConfig], CommandResult]] = {
    "classify": cmd_classify,
    "explode": cmd_explode,
    "collapse": cmd_collapse,
    "search": cmd_search,
    "lookup": cmd_lookup,
    "doubling": cmd_doubling,
    "annex": cmd_annex,
    "census": cmd_census,
    "mine": cmd_mine,
}
