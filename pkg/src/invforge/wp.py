"""Initiation and consecution conditions by weakest precondition.

Every loop is cut: at its head the asserted formula (if the loop is the
goal of an initiation check) is established, the loop targets are havocked,
the loop invariants are assumed, and then either one body iteration runs
and ends in ``assume false`` or the negated guard is assumed and execution
continues past the loop. Each condition is generated from the whole
procedure with exactly one obligation; every other assertion is assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

from .analysis import targets
from .syntax import (
    FALSE, TRUE, Assert, Assign, Assume, Binary, BoolLit, Call, Expr, Havoc,
    If, ProcedureDecl, Program, Stmt, Type, Unary, Var, While, scope_types,
    substitute,
)

INITIATION = "initiation"
CONSECUTION = "consecution"


@dataclass(frozen=True)
class VerificationCondition:
    kind: str  # INITIATION or CONSECUTION
    loop: str
    formula: Expr

    @property
    def label(self) -> str:
        return f"{self.kind}@{self.loop}"


# --------------------------------------------------------------------------
# simplifying constructors


def mk_not(p: Expr) -> Expr:
    if isinstance(p, BoolLit):
        return FALSE if p.value else TRUE
    if isinstance(p, Unary) and p.op == "!":
        return p.operand
    return Unary("!", p, ty=Type.BOOL)


def mk_and(p: Expr, q: Expr) -> Expr:
    if p == TRUE:
        return q
    if q == TRUE:
        return p
    if p == FALSE or q == FALSE:
        return FALSE
    return Binary("&&", p, q, ty=Type.BOOL)


def mk_implies(p: Expr, q: Expr) -> Expr:
    if q == TRUE or p == FALSE:
        return TRUE
    if p == TRUE:
        return q
    return Binary("==>", p, q, ty=Type.BOOL)


def mk_conj(parts) -> Expr:
    out = TRUE
    for p in parts:
        out = mk_and(out, p)
    return out


# --------------------------------------------------------------------------


class _Context:
    def __init__(self, program: Program, proc: ProcedureDecl, goal: tuple[str, str],
                 asserted: Mapping[str, Expr], assumed: Mapping[str, Expr]):
        self.program = program
        self.proc = proc
        self.goal = goal
        self.asserted = asserted
        self.assumed = assumed
        self.types = scope_types(proc, program)
        self.counter = itertools.count(1)

    def fresh(self, name: str, ty: Optional[Type]) -> Var:
        return Var(f"{name}@{next(self.counter)}", ty=ty)

    def havoc(self, names, q: Expr) -> Expr:
        if q == TRUE:
            return q
        return substitute(q, {n: self.fresh(n, self.types.get(n)) for n in sorted(names)})

    def block(self, stmts: tuple[Stmt, ...], q: Expr, prefix: str) -> Expr:
        for k in range(len(stmts) - 1, -1, -1):
            q = self.stmt(stmts[k], q, f"{prefix}[{k}]")
        return q

    def stmt(self, s: Stmt, q: Expr, here: str) -> Expr:
        if isinstance(s, (Assert, Assume)):
            # source assertions are assumed: only the goal is proved
            return mk_implies(s.formula, q)
        if isinstance(s, Assign):
            return substitute(q, {s.target: s.value}) if q != TRUE else q
        if isinstance(s, Havoc):
            return self.havoc(s.names, q)
        if isinstance(s, If):
            then = self.block(s.then, q, here + ".then")
            orelse = self.block(s.orelse, q, here + ".else")
            return mk_and(mk_implies(s.cond, then), mk_implies(mk_not(s.cond), orelse))
        if isinstance(s, Call):
            return self.call(s, q)
        if isinstance(s, While):
            return self.loop(s, q, here)
        raise TypeError(f"unexpected statement {s!r}")

    def call(self, s: Call, q: Expr) -> Expr:
        callee = self.program.procedure(s.proc)
        temps = [self.fresh(d.name, d.type) for d in callee.ins]
        pre_map = {d.name: a for d, a in zip(callee.ins, s.args)}
        post_map = {d.name: t for d, t in zip(callee.ins, temps)}
        post_map.update({d.name: Var(o, ty=d.type) for d, o in zip(callee.outs, s.outs)})
        ens = mk_conj(substitute(e, post_map) for e in callee.ensures)
        req = mk_conj(substitute(r, pre_map) for r in callee.requires)
        q = mk_implies(ens, q)
        q = self.havoc(set(s.outs) | set(callee.modifies), q)
        q = mk_implies(req, q)
        # temporaries stand for the argument values before the call
        return substitute(q, {t.name: a for t, a in zip(temps, s.args)}) if q != TRUE else q

    def loop(self, s: While, q: Expr, here: str) -> Expr:
        inv = mk_conj([self.asserted.get(here, TRUE), *s.invariants, self.assumed.get(here, TRUE)])
        body_goal = TRUE
        if self.goal == (CONSECUTION, here):
            body_goal = self.asserted[here]
        body = self.block(s.body, body_goal, here)
        iteration = mk_and(mk_implies(s.guard, body), mk_implies(mk_not(s.guard), q))
        out = self.havoc(targets(s, self.program), mk_implies(inv, iteration))
        if self.goal == (INITIATION, here):
            out = mk_and(self.asserted[here], out)
        return out


def loop_condition(program: Program, proc: ProcedureDecl, kind: str, loop_id: str,
                   asserted: Mapping[str, Expr],
                   assumed: Optional[Mapping[str, Expr]] = None) -> VerificationCondition:
    """The single obligation ``kind`` for loop ``loop_id``.

    ``asserted`` maps loop ids to the formula declared there under test;
    ``assumed`` maps loop ids to extra formulas taken for granted.
    """
    if loop_id not in asserted:
        raise KeyError(f"no formula asserted at loop {loop_id}")
    ctx = _Context(program, proc, (kind, loop_id), asserted, assumed or {})
    body = ctx.block(proc.body or (), TRUE, proc.name)
    return VerificationCondition(kind, loop_id, mk_implies(mk_conj(proc.requires), body))


def procedure_conditions(program: Program, proc: ProcedureDecl,
                         asserted: Mapping[str, Expr],
                         assumed: Optional[Mapping[str, Expr]] = None,
                         order: Optional[list[str]] = None) -> list[VerificationCondition]:
    """Initiation and consecution conditions for every loop in ``asserted``."""
    ids = order if order is not None else list(asserted)
    out = []
    for lid in ids:
        if lid in asserted:
            out.append(loop_condition(program, proc, INITIATION, lid, asserted, assumed))
            out.append(loop_condition(program, proc, CONSECUTION, lid, asserted, assumed))
    return out
