"""Syntactic facts consumed by the weakening engine.

Loop target sets, loop nesting, typed sub-expression enumeration with
pre-order positions, and the two substitution operators (replace every
occurrence, replace the n-th occurrence).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import AnalysisError, SubstitutionError
from .printer import expr_str
from .syntax import (
    Assign, Call, Expr, Havoc, If, IntLit, ProcedureDecl, Program, Quant,
    Select, Stmt, Type, Var, While, rebuild, scope_types,
)

ID, NUMBER, MAP = "Id", "Number", "Map"
CLASSES = (ID, NUMBER, MAP)


class OccurrenceRangeError(SubstitutionError, IndexError):
    pass


@dataclass(frozen=True)
class LoopInfo:
    id: str
    guard: Expr
    body: tuple[Stmt, ...]
    declared_invariants: tuple[Expr, ...]
    targets: frozenset[str]
    parent: Optional[str]
    depth: int
    target_types: dict[str, Type] = field(default_factory=dict, compare=False, hash=False)

    def sorted_targets(self) -> list[str]:
        return sorted(self.targets)


@dataclass(frozen=True)
class OccurrenceIndex:
    formula: Expr
    subexpression: Expr
    position: int  # ordinal among occurrences of the class, 1-based
    nth: int  # ordinal among occurrences of this very sub-expression
    bound: bool = False  # quantifier-bound identifier (binder or bound use)


# --------------------------------------------------------------------------
# targets and loops


def _modified(stmts: tuple[Stmt, ...], program: Program) -> set[str]:
    out: set[str] = set()
    for s in stmts:
        if isinstance(s, Assign):
            out.add(s.target)
        elif isinstance(s, Havoc):
            out.update(s.names)
        elif isinstance(s, Call):
            try:
                callee = program.procedure(s.proc)
            except KeyError:
                raise AnalysisError(f"call to undeclared procedure '{s.proc}'") from None
            out.update(s.outs)
            out.update(callee.modifies)
        elif isinstance(s, If):
            out |= _modified(s.then, program)
            out |= _modified(s.orelse, program)
        elif isinstance(s, While):
            out |= _modified(s.body, program)
    return out


def targets(loop: LoopInfo | While, program: Program) -> frozenset[str]:
    """Variables (maps included) the loop body may modify."""
    return frozenset(_modified(loop.body, program))


def all_loops(proc: ProcedureDecl, program: Program) -> list[LoopInfo]:
    """Every loop of ``proc`` in pre-order, with ids ``proc[i][j]...``."""
    if proc.body is None:
        return []
    types = scope_types(proc, program)
    out: list[LoopInfo] = []

    def visit(stmts, prefix: str, parent: Optional[str], depth: int) -> None:
        for k, s in enumerate(stmts):
            here = f"{prefix}[{k}]"
            if isinstance(s, While):
                tg = targets(s, program)
                out.append(LoopInfo(here, s.guard, s.body, s.invariants, tg, parent, depth,
                                    {t: types[t] for t in tg}))
                visit(s.body, here, here, depth + 1)
            elif isinstance(s, If):
                visit(s.then, here + ".then", parent, depth)
                visit(s.orelse, here + ".else", parent, depth)

    visit(proc.body, proc.name, None, 0)
    return out


def outer_loops(proc: ProcedureDecl, program: Program) -> list[LoopInfo]:
    return [lp for lp in all_loops(proc, program) if lp.parent is None]


def loop_statements(proc: ProcedureDecl) -> dict[str, While]:
    """Map loop id to its ``While`` node (ids as in :func:`all_loops`)."""
    out: dict[str, While] = {}

    def visit(stmts, prefix):
        for k, s in enumerate(stmts):
            here = f"{prefix}[{k}]"
            if isinstance(s, While):
                out[here] = s
                visit(s.body, here)
            elif isinstance(s, If):
                visit(s.then, here + ".then")
                visit(s.orelse, here + ".else")

    if proc.body is not None:
        visit(proc.body, proc.name)
    return out


def variables(proc: ProcedureDecl, program: Program) -> set[str]:
    """Every variable visible in ``proc``: parameters, locals and globals."""
    return set(scope_types(proc, program))


# --------------------------------------------------------------------------
# occurrences


def _class_of(e: Expr) -> Optional[str]:
    if isinstance(e, Var):
        return ID
    if isinstance(e, IntLit):
        return NUMBER
    if isinstance(e, Select):
        return MAP
    return None


def _walk_with_binding(e: Expr, bound: frozenset[str], out: list[tuple[Expr, bool]]) -> None:
    if isinstance(e, Quant):
        out.append((e, False))
        names = frozenset(b.name for b in e.binders)
        for b in e.binders:
            out.append((b, True))
        _walk_with_binding(e.body, bound | names, out)
        return
    out.append((e, isinstance(e, Var) and e.name in bound))
    for c in e.children():
        _walk_with_binding(c, bound, out)


def subexpressions(f: Expr, cls: str) -> list[OccurrenceIndex]:
    """Occurrences of syntactic class ``cls`` (Id, Number or Map) in pre-order."""
    if cls not in CLASSES:
        raise ValueError(f"unknown syntactic class {cls!r}")
    nodes: list[tuple[Expr, bool]] = []
    _walk_with_binding(f, frozenset(), nodes)
    out: list[OccurrenceIndex] = []
    seen: dict[Expr, int] = {}
    for node, is_bound in nodes:
        if _class_of(node) != cls:
            continue
        seen[node] = seen.get(node, 0) + 1
        out.append(OccurrenceIndex(f, node, len(out) + 1, seen[node], is_bound))
    return out


def count_occurrences(f: Expr, old: Expr) -> int:
    n = 1 if f == old else 0
    if n:
        return n
    return sum(count_occurrences(c, old) for c in f.children())


def _check_types(old: Expr, new: Expr) -> None:
    if old.ty is not None and new.ty is not None and old.ty != new.ty:
        raise SubstitutionError(
            f"cannot replace {expr_str(old)} ({old.ty}) by {expr_str(new)} ({new.ty})")


def _replace_node(node: Expr, new: Expr, parent: Optional[Expr]) -> Expr:
    if isinstance(parent, Quant) and isinstance(node, Var) and node in parent.binders:
        if not isinstance(new, Var):
            raise SubstitutionError(
                f"bound variable {node.name} can only be renamed, not replaced by "
                f"{expr_str(new)}")
        return Var(new.name, span=node.span, ty=node.ty)
    return new


def replace_all(f: Expr, old: Expr, new: Expr) -> Expr:
    """Replace every structural occurrence of ``old`` by ``new``."""
    _check_types(old, new)

    def go(node: Expr, parent: Optional[Expr]) -> Expr:
        if node == old:
            return _replace_node(node, new, parent)
        kids = node.children()
        if not kids:
            return node
        return rebuild(node, [go(k, node) for k in kids])

    return go(f, None)


def replace_nth(f: Expr, old: Expr, new: Expr, n: int) -> Expr:
    """Replace only the ``n``-th (1-based, pre-order) occurrence of ``old``."""
    _check_types(old, new)
    total = count_occurrences(f, old)
    if n < 1 or n > total:
        raise OccurrenceRangeError(
            f"{expr_str(old)} occurs {total} time(s); cannot replace occurrence {n}")
    counter = 0

    def go(node: Expr, parent: Optional[Expr]) -> Expr:
        nonlocal counter
        if counter >= n:
            return node
        if node == old:
            counter += 1
            return _replace_node(node, new, parent) if counter == n else node
        kids = node.children()
        if not kids:
            return node
        return rebuild(node, [go(k, node) for k in kids])

    return go(f, None)


def analysis_report(program: Program, proc: ProcedureDecl) -> dict:
    """JSON-ready dump of loop targets and ensures occurrence tables."""
    loops = all_loops(proc, program)
    return {
        "procedure": proc.name,
        "loops": [
            {"id": lp.id, "parent": lp.parent, "depth": lp.depth,
             "targets": lp.sorted_targets()}
            for lp in loops
        ],
        "ensures": [
            {
                "formula": expr_str(post),
                "occurrences": {
                    cls: [{"position": o.position, "nth": o.nth, "bound": o.bound,
                           "expr": expr_str(o.subexpression)}
                          for o in subexpressions(post, cls)]
                    for cls in CLASSES
                },
            }
            for post in proc.ensures
        ],
    }
