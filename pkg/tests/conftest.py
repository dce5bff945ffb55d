import functools
import sys
from pathlib import Path

import pytest

from invforge.errors import SolverError
from invforge.parser import parse_program
from invforge.smt import Solver

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

sys.path.insert(0, str(Path(__file__).resolve().parent))


@functools.lru_cache(maxsize=None)
def load(name: str):
    path = CORPUS / name if (CORPUS / name).exists() else FIXTURES / name
    return parse_program(path.read_text())


def corpus_files():
    return sorted(p.name for p in CORPUS.glob("*.ivl"))


# Python models of the body-less logic functions used by the corpus; they
# satisfy the corpus axioms for every integer k, negative ones included.
def psum(A, k):
    if k >= 0:
        return sum(A.get(t) for t in range(1, k + 1))
    return -sum(A.get(t) for t in range(k + 1, 1))


def occ(A, v, k):
    if k >= 0:
        return sum(1 for t in range(1, k + 1) if A.get(t) == v)
    return -sum(1 for t in range(k + 1, 1) if A.get(t) == v)


MODELS = {"psum": psum, "occ": occ}


@pytest.fixture(scope="session")
def solver():
    try:
        return Solver()
    except SolverError as exc:
        pytest.skip(f"no SMT solver available: {exc}")


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS


# ---------------------------------------------------------------- acceptance summary

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "failed": 0, "passed": 0, "skipped": 0})
    if report.failed:
        entry["failed"] += 1
    elif report.skipped:
        entry["skipped"] += 1
    elif report.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        if e["failed"]:
            verdict = "FAIL"
        elif e["skipped"] and not e["passed"]:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {e['title']}")
