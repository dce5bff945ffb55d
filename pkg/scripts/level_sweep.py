"""Candidate and invariant counts per heuristic level for every corpus procedure.

With --generate-only no solver is needed and only candidate counts are shown.
"""

import argparse
from pathlib import Path

from invforge.corpus import analyzable
from invforge.parser import parse_program
from invforge.smt import Solver
from invforge.verifier import infer
from invforge.weakening import HeuristicLevel, generate_candidates

LEVELS = range(5)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory", type=Path, nargs="?", default=Path("corpus"))
    ap.add_argument("--generate-only", action="store_true")
    ap.add_argument("--timeout", type=float, default=10.0)
    args = ap.parse_args()

    solver = None if args.generate_only else Solver(timeout=args.timeout)
    header = "procedure".ljust(28) + "".join(f"L{k}".rjust(10) for k in LEVELS)
    print(header)
    for path in sorted(args.directory.glob("*.ivl")):
        program = parse_program(path.read_text())
        for proc in program.procedures:
            if not analyzable(proc, program):
                continue
            cells = []
            for k in LEVELS:
                level = HeuristicLevel.preset(k)
                if solver is None:
                    cells.append(str(len(generate_candidates(proc, program, level))))
                else:
                    report = infer(program, proc.name, level, solver)
                    cells.append(f"{len(report.verified)}/{report.candidate_count}")
            print(f"{path.stem}.{proc.name}"[:27].ljust(28) + "".join(c.rjust(10) for c in cells))


if __name__ == "__main__":
    main()
