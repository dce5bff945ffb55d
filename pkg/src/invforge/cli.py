"""Command-line entry point: ``invforge infer|corpus|parse``."""

from __future__ import annotations

import argparse
import json
import sys
import threading
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .analysis import analysis_report
from .corpus import RunConfig, analyzable, rows_to_json, rows_to_text, run_corpus
from .errors import IVLError, SolverError
from .parser import parse_program
from .printer import pretty_print
from .smt import DEFAULT_TIMEOUT
from .verifier import InferenceReport, infer
from .weakening import HeuristicLevel, generate_candidates

EXIT_OK, EXIT_NONE_VERIFIED, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

_HEURISTIC_FLAGS = {
    "relaxation": "enable_relaxation",
    "aging": "enable_aging",
    "uncoupling": "enable_uncoupling",
    "conjunct-split": "enable_conjunct_split",
    "double-uncoupling": "enable_double_uncoupling",
}

_print_lock = threading.Lock()


def _out(text: str, stream=None) -> None:
    with _print_lock:
        print(text, file=stream or sys.stdout, flush=True)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="invforge", description="Loop invariant inference by postcondition weakening.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_options(p):
        p.add_argument("--procedure", help="analyze only this procedure")
        p.add_argument("--level", type=int, choices=range(5), default=3,
                       help="heuristic preset (default 3)")
        for flag in _HEURISTIC_FLAGS:
            p.add_argument(f"--{flag}", action=argparse.BooleanOptionalAction, default=None,
                           help=f"override the preset for {flag.replace('-', ' ')}")
        p.add_argument("--solver", help="SMT solver executable (else $INVFORGE_SOLVER, else z3)")
        p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                       help="seconds per verification condition")
        p.add_argument("--jobs", type=int, default=1, help="candidates checked in parallel")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--keep-scripts", nargs="?", const="invforge-scripts", default=None,
                       metavar="DIR", help="write every SMT-LIB script to DIR")
        p.add_argument("--assume-verified", action="store_true",
                       help="re-check failed candidates assuming the verified ones")
        p.add_argument("--check-declared", action="store_true",
                       help="prove declared loop invariants before using them")

    infer_p = sub.add_parser("infer", help="infer invariants for one file")
    infer_p.add_argument("file", type=Path)
    run_options(infer_p)
    infer_p.add_argument("--dump-candidates", nargs="?", const="-", default=None, metavar="PATH",
                         help="write the ordered candidates with traces as JSON (stderr if no PATH)")
    infer_p.add_argument("--dump-analysis", nargs="?", const="-", default=None, metavar="PATH",
                         help="write loop targets and occurrence tables as JSON (stderr if no PATH)")

    corpus_p = sub.add_parser("corpus", help="summarize inference over a directory of .ivl files")
    corpus_p.add_argument("directory", type=Path)
    run_options(corpus_p)

    parse_p = sub.add_parser("parse", help="check that a file survives print and re-parse")
    parse_p.add_argument("file", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    level = HeuristicLevel.preset(args.level)
    overrides = {field: getattr(args, flag.replace("-", "_"))
                 for flag, field in _HEURISTIC_FLAGS.items()
                 if getattr(args, flag.replace("-", "_")) is not None}
    level = replace(level, **overrides)
    inputs = [getattr(args, "file", None) or args.directory]
    return RunConfig(
        inputs=inputs, procedure=args.procedure, level=level, solver=args.solver,
        timeout=args.timeout, jobs=max(1, args.jobs), format=args.format,
        keep_scripts=Path(args.keep_scripts) if args.keep_scripts else None,
        dump_candidates=getattr(args, "dump_candidates", None),
        assume_verified=args.assume_verified, check_declared=args.check_declared,
    )


def _write_json(target: str, payload) -> None:
    text = json.dumps(payload, indent=2)
    if target == "-":
        _out(text, sys.stderr)
    else:
        Path(target).write_text(text + "\n")


def _load(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_program(text)
    except IVLError as exc:
        raise _UsageError(f"{path}:{exc}") from exc


def report_text(path: Path, report: InferenceReport) -> str:
    lines = [f"{path}: procedure {report.procedure}: {report.candidate_count} candidates, "
             f"{len(report.verified)} verified, {len(report.unknown)} unknown "
             f"({report.seconds:.2f} s)"]
    for d in report.declared:
        mark = "ok" if d["verified"] else "FAILED"
        lines.append(f"  declared at {d['loop']} [{mark}]: {d['formula']}")
    for o in report.outcomes:
        if o.status == "verified":
            note = " (assisted)" if o.assisted else ""
            lines.append(f"  invariant{note}: {o.candidate.text}")
            lines.append(f"    holds at {', '.join(o.surviving)}")
    for o in report.with_status("unknown"):
        lines.append(f"  unknown: {o.candidate.text}")
    for o in report.with_status("error", "discarded"):
        lines.append(f"  {o.status}: {o.candidate.text}: {o.diagnostic}")
    return "\n".join(lines)


def cmd_infer(args) -> int:
    config = config_from_args(args)
    program = _load(args.file)
    procs = [p for p in program.procedures if analyzable(p, program)]
    if config.procedure:
        named = [p for p in program.procedures if p.name == config.procedure]
        if not named:
            raise _UsageError(f"{args.file}: no procedure named {config.procedure}")
        procs = named
    if args.dump_analysis:
        _write_json(args.dump_analysis, [analysis_report(program, p) for p in procs])
    if config.dump_candidates:
        _write_json(config.dump_candidates, {
            p.name: [c.to_json() for c in generate_candidates(p, program, config.level)]
            for p in procs})
    solver = config.make_solver()
    reports = []
    for p in procs:
        reports.append(infer(program, p.name, config.level, solver, config.jobs,
                             config.assume_verified, config.check_declared))
    if config.format == "json":
        _out(json.dumps({"file": str(args.file), "reports": [r.to_json() for r in reports]},
                        indent=2))
    else:
        for r in reports:
            _out(report_text(args.file, r))
    errors = [e for r in reports for e in r.errors]
    if errors:
        for e in errors:
            _out(f"invforge: {e}", sys.stderr)
        return EXIT_SOLVER
    if not reports or any(not r.verified for r in reports):
        return EXIT_NONE_VERIFIED
    return EXIT_OK


def cmd_corpus(args) -> int:
    if not args.directory.is_dir():
        raise _UsageError(f"not a directory: {args.directory}")
    config = config_from_args(args)
    rows = run_corpus(args.directory, config)
    _out(rows_to_json(rows) if config.format == "json" else rows_to_text(rows).rstrip("\n"))
    if any(r.error for r in rows):
        for r in rows:
            if r.error:
                _out(f"invforge: {r.file}: {r.error}", sys.stderr)
    if any(r.verified == 0 for r in rows):
        return EXIT_NONE_VERIFIED
    return EXIT_OK


def cmd_parse(args) -> int:
    program = _load(args.file)
    again = parse_program(pretty_print(program))
    if again != program:
        _out(f"{args.file}: printed program parses to a different tree", sys.stderr)
        return EXIT_NONE_VERIFIED
    _out(f"{args.file}: ok ({len(program.procedures)} procedures, "
         f"{len(program.functions)} functions)")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"infer": cmd_infer, "corpus": cmd_corpus, "parse": cmd_parse}[args.command]
        return handler(args)
    except _UsageError as exc:
        _out(f"invforge: error: {exc}", sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        _out(f"invforge: solver error: {exc}", sys.stderr)
        return EXIT_SOLVER


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
