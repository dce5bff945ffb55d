"""Checking candidates for initiation and consecution, and the inference driver.

A candidate is declared at every loop of the procedure. Each round checks
all conditions of the loops still carrying it and withdraws it from every
loop with a condition that is not proved. The candidate is an invariant
when at least one loop keeps it once the set stops shrinking.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .analysis import all_loops
from .errors import IVLError, SolverError
from .printer import expr_str
from .resolve import check_expr
from .smt import UNKNOWN, VALID, Solver, Verdict
from .syntax import Expr, If, ProcedureDecl, Program, Type, While, scope_types
from .weakening import DEFAULT_LEVEL, Candidate, HeuristicLevel, generate_candidates
from .wp import VerificationCondition, mk_conj, procedure_conditions

VERIFIED = "verified"
TRIVIAL = "trivial"  # weakened into a formula valid on its own
REJECTED = "rejected"
UNPROVED = "unknown"
DISCARDED = "discarded"  # does not type-check in the procedure scope
ERROR = "error"


@dataclass(frozen=True)
class InstrumentedProcedure:
    base: ProcedureDecl
    candidate: Candidate
    instances: frozenset[str]
    order: tuple[str, ...] = ()

    def asserted(self) -> dict[str, Expr]:
        return {lid: self.candidate.formula for lid in self.order if lid in self.instances}


class InstrumentError(ValueError):
    pass


@dataclass
class VCResult:
    kind: str
    loop: str
    verdict: Verdict
    seconds: float

    def to_json(self) -> dict:
        return {"kind": self.kind, "loop": self.loop, "verdict": self.verdict.kind,
                "detail": self.verdict.detail, "seconds": round(self.seconds, 4)}


@dataclass
class Round:
    number: int
    instances: list[str]
    removed: list[str]
    results: list[VCResult]

    def to_json(self) -> dict:
        return {"round": self.number, "instances": self.instances, "removed": self.removed,
                "conditions": [r.to_json() for r in self.results]}


@dataclass
class FixpointOutcome:
    surviving: list[str]
    rounds: list[Round] = field(default_factory=list)
    error: str = ""

    @property
    def final_results(self) -> list[VCResult]:
        return self.rounds[-1].results if self.rounds else []

    @property
    def saw_unknown(self) -> bool:
        return any(r.verdict.kind == UNKNOWN for rd in self.rounds for r in rd.results)


@dataclass
class CandidateOutcome:
    candidate: Candidate
    status: str
    surviving: list[str] = field(default_factory=list)
    rounds: list[Round] = field(default_factory=list)
    seconds: float = 0.0
    diagnostic: str = ""
    assisted: bool = False  # verified only with other invariants assumed

    def to_json(self) -> dict:
        return {
            **self.candidate.to_json(),
            "status": self.status,
            "surviving_instances": self.surviving,
            "assisted": self.assisted,
            "rounds": [r.to_json() for r in self.rounds],
            "seconds": round(self.seconds, 4),
            "diagnostic": self.diagnostic,
        }


@dataclass
class InferenceReport:
    procedure: str
    level: HeuristicLevel
    outcomes: list[CandidateOutcome]
    seconds: float = 0.0
    declared: list[dict] = field(default_factory=list)

    @property
    def candidate_count(self) -> int:
        return len(self.outcomes)

    def with_status(self, *statuses: str) -> list[CandidateOutcome]:
        return [o for o in self.outcomes if o.status in statuses]

    @property
    def verified(self) -> list[str]:
        return [o.candidate.text for o in self.with_status(VERIFIED)]

    @property
    def unknown(self) -> list[str]:
        return [o.candidate.text for o in self.with_status(UNPROVED)]

    @property
    def errors(self) -> list[str]:
        return [o.diagnostic for o in self.with_status(ERROR)]

    def to_json(self) -> dict:
        return {
            "procedure": self.procedure,
            "level": self.level.as_dict(),
            "candidate_count": self.candidate_count,
            "verified": self.verified,
            "unknown": self.unknown,
            "trivial": [o.candidate.text for o in self.with_status(TRIVIAL)],
            "errors": self.errors,
            "declared": self.declared,
            "seconds": round(self.seconds, 4),
            "candidates": [o.to_json() for o in self.outcomes],
        }


# --------------------------------------------------------------------------


def instrument(program: Program, proc: ProcedureDecl, cand: Candidate) -> InstrumentedProcedure:
    """Declare ``cand`` at every loop of ``proc``."""
    try:
        formula = check_expr(cand.formula, scope_types(proc, program),
                             {f.name: f for f in program.functions}, Type.BOOL)
    except IVLError as exc:
        raise InstrumentError(f"candidate {cand.text} is not well-formed: {exc.message}") from exc
    ids = tuple(lp.id for lp in all_loops(proc, program))
    checked = Candidate(formula, cand.origin, cand.trace, cand.source_loop)
    return InstrumentedProcedure(proc, checked, frozenset(ids), ids)


def generate_vcs(ip: InstrumentedProcedure, program: Program,
                 assumed: Optional[Mapping[str, Expr]] = None) -> list[VerificationCondition]:
    return procedure_conditions(program, ip.base, ip.asserted(), assumed, list(ip.order))


def check(vc: VerificationCondition, program: Program, solver: Solver) -> Verdict:
    return solver.check(vc, program)


def run_fixpoint(program: Program, proc: ProcedureDecl, asserted: Mapping[str, Expr],
                 solver: Solver, assumed: Optional[Mapping[str, Expr]] = None,
                 tag: str = "") -> FixpointOutcome:
    """Withdraw failing loop formulas until every remaining condition is proved.

    ``asserted`` maps each loop id to the formula declared there. Solver
    errors stop the run and are returned in ``error``.
    """
    order = [lid for lid in (lp.id for lp in all_loops(proc, program)) if lid in asserted]
    current = list(order)
    rounds: list[Round] = []
    while current:
        live = {lid: asserted[lid] for lid in current}
        results = []
        failing = set()
        for vc in procedure_conditions(program, proc, live, assumed, current):
            if vc.loop in failing:
                continue  # already withdrawn this round
            start = time.perf_counter()
            try:
                verdict = solver.check(vc, program, f"{tag}-{vc.label}" if tag else vc.label)
            except SolverError as exc:
                return FixpointOutcome([], rounds, str(exc))
            results.append(VCResult(vc.kind, vc.loop, verdict, time.perf_counter() - start))
            if verdict.kind != VALID:
                failing.add(vc.loop)
        removed = [lid for lid in current if lid in failing]
        rounds.append(Round(len(rounds) + 1, list(current), removed, results))
        if not removed:
            break
        current = [lid for lid in current if lid not in failing]
    return FixpointOutcome(current, rounds)


def fixpoint_filter(program: Program, proc: ProcedureDecl, cand: Candidate, solver: Solver,
                    assumed: Optional[Mapping[str, Expr]] = None,
                    tag: str = "") -> FixpointOutcome:
    ip = instrument(program, proc, cand)
    return run_fixpoint(program, proc, ip.asserted(), solver, assumed, tag)


def is_tautology(formula: Expr, program: Program, solver: Solver) -> bool:
    vc = VerificationCondition("validity", "-", formula)
    return solver.check(vc, program).kind == VALID


def evaluate(program: Program, proc: ProcedureDecl, cand: Candidate, solver: Solver,
             assumed: Optional[Mapping[str, Expr]] = None, tag: str = "") -> CandidateOutcome:
    start = time.perf_counter()
    try:
        outcome = fixpoint_filter(program, proc, cand, solver, assumed, tag)
    except InstrumentError as exc:
        return CandidateOutcome(cand, DISCARDED, diagnostic=str(exc),
                                seconds=time.perf_counter() - start)
    if outcome.error:
        status = ERROR
    elif outcome.surviving:
        status = VERIFIED
        if cand.weakened:
            try:
                if is_tautology(cand.formula, program, solver):
                    status = TRIVIAL
            except SolverError as exc:
                return CandidateOutcome(cand, ERROR, diagnostic=str(exc),
                                        seconds=time.perf_counter() - start)
    elif outcome.saw_unknown:
        status = UNPROVED
    else:
        status = REJECTED
    return CandidateOutcome(cand, status, outcome.surviving, outcome.rounds,
                            time.perf_counter() - start, outcome.error)


def declared_invariants(program: Program, proc: ProcedureDecl) -> dict[str, Expr]:
    return {lp.id: mk_conj(lp.declared_invariants)
            for lp in all_loops(proc, program) if lp.declared_invariants}


def _strip_declared(proc: ProcedureDecl, keep: set[str]) -> ProcedureDecl:
    """Copy of ``proc`` whose loops keep declared invariants only if in ``keep``."""
    def block(stmts, prefix):
        out = []
        for k, s in enumerate(stmts):
            here = f"{prefix}[{k}]"
            if isinstance(s, While):
                invs = s.invariants if here in keep else ()
                out.append(While(s.guard, invs, block(s.body, here), span=s.span))
            elif isinstance(s, If):
                out.append(If(s.cond, block(s.then, here + ".then"),
                              block(s.orelse, here + ".else"), span=s.span))
            else:
                out.append(s)
        return tuple(out)

    return replace(proc, body=block(proc.body or (), proc.name))


def infer(program: Program, proc_name: str, level: HeuristicLevel = DEFAULT_LEVEL,
          solver: Optional[Solver] = None, jobs: int = 1, assume_verified: bool = False,
          check_declared: bool = False,
          candidates: Optional[list[Candidate]] = None) -> InferenceReport:
    """Generate candidates for ``proc_name`` and keep those that are invariants."""
    solver = solver or Solver()
    start = time.perf_counter()
    proc = program.procedure(proc_name)
    declared_report: list[dict] = []
    if check_declared:
        declared = declared_invariants(program, proc)
        if declared:
            # declared invariants are checked together, each at its own loop
            stripped = _strip_declared(proc, set())
            outcome = run_fixpoint(program, stripped, declared, solver, tag=f"{proc.name}-declared")
            if outcome.error:
                raise SolverError(outcome.error)
            keep = set(outcome.surviving)
            declared_report = [{"loop": lid, "formula": expr_str(f), "verified": lid in keep}
                               for lid, f in declared.items()]
            proc = _strip_declared(proc, keep)
    if candidates is None:
        candidates = generate_candidates(proc, program, level)

    def run(indexed):
        k, cand = indexed
        return evaluate(program, proc, cand, solver, tag=f"{proc.name}-c{k}")

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        outcomes = list(pool.map(run, enumerate(candidates)))

    if assume_verified:
        outcomes = _assisted_rounds(program, proc, outcomes, solver, pool_size=jobs)
    return InferenceReport(proc.name, level, outcomes, time.perf_counter() - start,
                           declared_report)


def _assisted_rounds(program: Program, proc: ProcedureDecl, outcomes: list[CandidateOutcome],
                     solver: Solver, pool_size: int) -> list[CandidateOutcome]:
    """Re-check unproved candidates with the verified ones assumed at their loops,
    until no further candidate is verified."""
    while True:
        assumed_parts: dict[str, list[Expr]] = {}
        for o in outcomes:
            if o.status == VERIFIED:
                for lid in o.surviving:
                    assumed_parts.setdefault(lid, []).append(o.candidate.formula)
        if not assumed_parts:
            return outcomes
        assumed = {lid: mk_conj(parts) for lid, parts in assumed_parts.items()}
        pending = [k for k, o in enumerate(outcomes) if o.status in (REJECTED, UNPROVED)]
        if not pending:
            return outcomes

        def run(k):
            return k, evaluate(program, proc, outcomes[k].candidate, solver, assumed,
                               tag=f"{proc.name}-c{k}-assisted")

        with ThreadPoolExecutor(max_workers=max(1, pool_size)) as pool:
            redone = list(pool.map(run, pending))
        progress = False
        outcomes = list(outcomes)
        for k, o in redone:
            if o.status == VERIFIED:
                o.assisted = True
                outcomes[k] = o
                progress = True
        if not progress:
            return outcomes
