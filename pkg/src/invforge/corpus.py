"""Run inference over a directory of ``.ivl`` files and summarize it per procedure."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .analysis import all_loops, outer_loops
from .errors import IVLError
from .parser import parse_program
from .printer import pretty_print, procedure_str
from .smt import DEFAULT_TIMEOUT, Solver
from .syntax import ProcedureDecl, Program, Type, scope_types
from .verifier import InferenceReport, infer
from .weakening import DEFAULT_LEVEL, HeuristicLevel


@dataclass
class RunConfig:
    inputs: list[Path] = field(default_factory=list)
    procedure: Optional[str] = None
    level: HeuristicLevel = DEFAULT_LEVEL
    solver: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    jobs: int = 1
    format: str = "text"
    keep_scripts: Optional[Path] = None
    dump_candidates: Optional[str] = None
    assume_verified: bool = False
    check_declared: bool = False

    def make_solver(self) -> Solver:
        return Solver(self.solver, self.timeout, self.keep_scripts)


@dataclass
class CorpusSummaryRow:
    file: str
    procedure: str
    loc_file: int = 0
    loc_procedure: int = 0
    loops: int = 0
    max_nesting: int = 0
    scalar_vars: int = 0
    map_vars: int = 0
    candidates: int = 0
    verified: int = 0
    unknown: int = 0
    seconds: float = 0.0
    error: str = ""

    def to_json(self) -> dict:
        return asdict(self)


COLUMNS = [f.name for f in fields(CorpusSummaryRow)]
_HEADERS = {
    "file": "file", "procedure": "procedure", "loc_file": "loc", "loc_procedure": "loc.p",
    "loops": "lp", "max_nesting": "nest", "scalar_vars": "mv.s", "map_vars": "mv.m",
    "candidates": "cnd", "verified": "inv", "unknown": "unk", "seconds": "time",
    "error": "error",
}


def analyzable(proc: ProcedureDecl, program: Program) -> bool:
    return proc.body is not None and bool(proc.ensures) and bool(all_loops(proc, program))


def _count_lines(text: str) -> int:
    return sum(1 for line in text.splitlines() if line.strip())


def describe(program: Program, proc: ProcedureDecl) -> dict:
    """Static columns of a summary row: size, loops, modified variables."""
    loops = all_loops(proc, program)
    types = scope_types(proc, program)
    modified = set()
    for lp in outer_loops(proc, program):
        modified |= lp.targets
    return {
        "loc_file": _count_lines(pretty_print(program)),
        "loc_procedure": _count_lines(procedure_str(proc)),
        "loops": len(loops),
        "max_nesting": max((lp.depth + 1 for lp in loops), default=0),
        "scalar_vars": sum(1 for v in modified if types[v] != Type.MAP),
        "map_vars": sum(1 for v in modified if types[v] == Type.MAP),
    }


def summarize(path: Path, program: Program, report: InferenceReport) -> CorpusSummaryRow:
    proc = program.procedure(report.procedure)
    return CorpusSummaryRow(
        file=path.name, procedure=proc.name, **describe(program, proc),
        candidates=report.candidate_count, verified=len(report.verified),
        unknown=len(report.unknown), seconds=round(report.seconds, 3),
        error="; ".join(report.errors),
    )


def run_file(path: Path, config: RunConfig, solver: Solver) -> list[tuple[CorpusSummaryRow, Optional[InferenceReport]]]:
    try:
        program = parse_program(path.read_text())
    except (OSError, IVLError) as exc:
        return [(CorpusSummaryRow(path.name, "", error=str(exc)), None)]
    out = []
    for proc in program.procedures:
        if not analyzable(proc, program):
            continue
        if config.procedure and proc.name != config.procedure:
            continue
        start = time.perf_counter()
        report = infer(program, proc.name, config.level, solver, config.jobs,
                       config.assume_verified, config.check_declared)
        report.seconds = time.perf_counter() - start
        out.append((summarize(path, program, report), report))
    return out


def run_corpus(directory: Path, config: RunConfig,
               solver: Optional[Solver] = None) -> list[CorpusSummaryRow]:
    """One row per analyzable procedure of every ``.ivl`` file, by file name."""
    solver = solver or config.make_solver()
    rows = []
    for path in sorted(Path(directory).glob("*.ivl")):
        rows += [row for row, _ in run_file(path, config, solver)]
    return rows


# --------------------------------------------------------------------------
# rendering


def rows_to_json(rows: list[CorpusSummaryRow]) -> str:
    return json.dumps([r.to_json() for r in rows], indent=2)


def _cell(row: CorpusSummaryRow, col: str) -> str:
    value = getattr(row, col)
    if col == "seconds":
        return f"{value:.3f}"
    return str(value) if value != "" else "-"


def rows_to_text(rows: list[CorpusSummaryRow]) -> str:
    table = [[_HEADERS[c] for c in COLUMNS]] + [[_cell(r, c) for c in COLUMNS] for r in rows]
    widths = [max(len(line[k]) for line in table) for k in range(len(COLUMNS))]
    lines = []
    for line in table:
        cells = [c.ljust(w) if k < 2 or k == len(COLUMNS) - 1 else c.rjust(w)
                 for k, (c, w) in enumerate(zip(line, widths))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def rows_from_text(text: str) -> list[CorpusSummaryRow]:
    """Inverse of :func:`rows_to_text` (error messages must not contain
    runs of two spaces)."""
    import re

    out = []
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        parts = re.split(r" {2,}", line.strip(), maxsplit=len(COLUMNS) - 1)
        parts += ["-"] * (len(COLUMNS) - len(parts))
        values = {}
        for col, raw in zip(COLUMNS, parts):
            kind = CorpusSummaryRow.__dataclass_fields__[col].type
            if raw == "-" and kind == "str":
                values[col] = ""
            elif kind == "int":
                values[col] = int(raw)
            elif kind == "float":
                values[col] = float(raw)
            else:
                values[col] = raw
        out.append(CorpusSummaryRow(**values))
    return out
