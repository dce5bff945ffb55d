"""Infer invariants for one file, then run them against bounded concrete executions.

Body-less logic functions of the corpus (psum, occ) get Python models here.
"""

import argparse
import sys
from pathlib import Path

from invforge.concrete import cross_check
from invforge.corpus import analyzable
from invforge.parser import parse_program
from invforge.verifier import VERIFIED, infer
from invforge.weakening import HeuristicLevel


def psum(A, k):
    if k >= 0:
        return sum(A.get(t) for t in range(1, k + 1))
    return -sum(A.get(t) for t in range(k + 1, 1))


def occ(A, v, k):
    if k >= 0:
        return sum(1 for t in range(1, k + 1) if A.get(t) == v)
    return -sum(1 for t in range(k + 1, 1) if A.get(t) == v)


MODELS = {"psum": psum, "occ": occ}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("file", type=Path)
    ap.add_argument("--level", type=int, default=3, choices=range(5))
    ap.add_argument("--limit", type=int, default=10**6,
                    help="enumerate inputs exhaustively below this many states, else sample")
    args = ap.parse_args()

    program = parse_program(args.file.read_text())
    failed = False
    for proc in program.procedures:
        if not analyzable(proc, program):
            continue
        report = infer(program, proc.name, HeuristicLevel.preset(args.level))
        invariants = {}
        for o in report.with_status(VERIFIED):
            for lid in o.surviving:
                invariants.setdefault(lid, []).append(o.candidate.formula)
        result = cross_check(program, proc, invariants, MODELS, limit=args.limit)
        print(f"{proc.name}: {len(report.verified)} invariants, {result.runs} runs, "
              f"{result.loop_visits} loop-head states, {len(result.violations)} violations")
        for v in result.violations:
            print(f"  {v}")
            failed = True
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
