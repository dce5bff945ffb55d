"""Summarize inference over the corpus as an aligned table (and optionally JSON).

    python3 scripts/corpus_table.py corpus --json results/table.json
"""

import argparse
from pathlib import Path

from invforge.corpus import RunConfig, rows_to_json, rows_to_text, run_corpus
from invforge.weakening import HeuristicLevel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory", type=Path, nargs="?", default=Path("corpus"))
    ap.add_argument("--level", type=int, default=3, choices=range(5))
    ap.add_argument("--timeout", type=float, default=10.0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--json", type=Path, help="also write the rows here")
    args = ap.parse_args()

    config = RunConfig(level=HeuristicLevel.preset(args.level), timeout=args.timeout, jobs=args.jobs)
    rows = run_corpus(args.directory, config)
    print(rows_to_text(rows), end="")
    if args.json:
        args.json.parent.mkdir(parents=True, exist_ok=True)
        args.json.write_text(rows_to_json(rows) + "\n")


if __name__ == "__main__":
    main()
