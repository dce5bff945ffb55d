"""Candidate invariants obtained by weakening postconditions.

Term dropping, constant relaxation (coupled and uncoupled), variable aging
and two-occurrence uncoupling. Every candidate records the substitutions
that produced it so it can be replayed from its ensures clause.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .analysis import (
    ID, MAP, NUMBER, LoopInfo, count_occurrences, outer_loops, replace_all,
    replace_nth, subexpressions,
)
from .printer import expr_str
from .syntax import (
    Assign, Binary, Expr, ProcedureDecl, Program, Quant, Type, Var,
    _fresh_name, alpha_key, conjuncts, free_vars, preorder, rebuild,
    scope_types, substitute, walk_statements,
)


@dataclass(frozen=True)
class HeuristicLevel:
    enable_relaxation: bool = True
    enable_aging: bool = True
    enable_uncoupling: bool = True
    enable_conjunct_split: bool = True
    enable_double_uncoupling: bool = False

    @classmethod
    def preset(cls, level: int) -> "HeuristicLevel":
        if not 0 <= level <= 4:
            raise ValueError(f"heuristic level must be in 0..4, got {level}")
        return cls(
            enable_relaxation=level >= 1,
            enable_aging=level >= 2,
            enable_uncoupling=level >= 3,
            enable_conjunct_split=level >= 3,
            enable_double_uncoupling=level >= 4,
        )

    def implies(self, other: "HeuristicLevel") -> bool:
        """True when every heuristic enabled here is enabled in ``other``."""
        return all(not a or b for a, b in zip(self.flags(), other.flags()))

    def flags(self) -> tuple[bool, ...]:
        return (self.enable_relaxation, self.enable_aging, self.enable_uncoupling,
                self.enable_conjunct_split, self.enable_double_uncoupling)

    def as_dict(self) -> dict[str, bool]:
        return {
            "relaxation": self.enable_relaxation,
            "aging": self.enable_aging,
            "uncoupling": self.enable_uncoupling,
            "conjunct_split": self.enable_conjunct_split,
            "double_uncoupling": self.enable_double_uncoupling,
        }


DEFAULT_LEVEL = HeuristicLevel.preset(3)


@dataclass(frozen=True)
class TraceStep:
    heuristic: str  # "drop", "relax" or "uncouple"
    old: Optional[Expr] = None
    new: Optional[Expr] = None
    position: Optional[int] = None  # None means every occurrence
    aged: bool = False
    conjunct: Optional[int] = None  # only for "drop"

    def to_json(self) -> dict:
        if self.heuristic == "drop":
            return {"heuristic": "drop", "keep_conjunct": self.conjunct}
        return {
            "heuristic": self.heuristic,
            "constant": expr_str(self.old),
            "variable": expr_str(self.new),
            "occurrence": "*" if self.position is None else self.position,
            "aged": self.aged,
        }


@dataclass(frozen=True)
class Candidate:
    formula: Expr
    origin: int
    trace: tuple[TraceStep, ...] = ()
    source_loop: Optional[str] = None

    @property
    def text(self) -> str:
        return expr_str(self.formula)

    @property
    def weakened(self) -> bool:
        """False for an ensures clause taken verbatim."""
        return bool(self.trace)

    def to_json(self) -> dict:
        return {
            "formula": self.text,
            "origin": self.origin,
            "source_loop": self.source_loop,
            "trace": [s.to_json() for s in self.trace],
        }


# --------------------------------------------------------------------------
# ensures clauses and term dropping


def prepare_clause(post: Expr, scope: Iterable[str]) -> Expr:
    """Rename quantifier binders that share a name with a program variable,
    so relaxing a constant can never be captured by a binder."""
    avoid = set(scope) | {v.name for v in preorder(post) if isinstance(v, Var)}

    def go(e: Expr) -> Expr:
        if isinstance(e, Quant):
            mapping, binders = {}, []
            for b in e.binders:
                if b.name in scope:
                    fresh = _fresh_name(b.name, avoid)
                    avoid.add(fresh)
                    mapping[b.name] = Var(fresh, ty=b.ty)
                    binders.append(Var(fresh, span=b.span, ty=b.ty))
                else:
                    binders.append(b)
            body = go(substitute(e.body, mapping)) if mapping else go(e.body)
            return Quant(e.kind, tuple(binders), e.types, body, span=e.span, ty=e.ty)
        kids = e.children()
        if not kids:
            return e
        return rebuild(e, [go(k) for k in kids])

    return go(post)


def _clauses(proc: ProcedureDecl, program: Optional[Program]) -> list[Expr]:
    scope = scope_types(proc, program) if program is not None else {
        d.name: d.type for d in (*proc.ins, *proc.outs, *proc.locals)}
    return [prepare_clause(e, scope) for e in proc.ensures]


def _sources(proc: ProcedureDecl, program: Optional[Program],
             level: HeuristicLevel) -> list[tuple[int, tuple[TraceStep, ...], Expr]]:
    out = []
    seen = set()
    for origin, clause in enumerate(_clauses(proc, program)):
        items = [((), clause)]
        parts = conjuncts(clause)
        if level.enable_conjunct_split and len(parts) > 1:
            items += [((TraceStep("drop", conjunct=k),), p) for k, p in enumerate(parts)]
        for trace, f in items:
            key = alpha_key(f)
            if key not in seen:
                seen.add(key)
                out.append((origin, trace, f))
    return out


def postconditions(proc: ProcedureDecl, level: HeuristicLevel = DEFAULT_LEVEL,
                   program: Optional[Program] = None) -> list[Expr]:
    """Ensures clauses, plus (with conjunct splitting) their top-level conjuncts."""
    return [f for _, _, f in _sources(proc, program, level)]


# --------------------------------------------------------------------------
# aging


def _loop_constant(e: Expr, loop: LoopInfo) -> bool:
    return not (free_vars(e) & loop.targets)


def aging(variable: str, loop: LoopInfo) -> list[Expr]:
    """Previous-iteration values of ``variable`` from affine self-updates."""
    out: list[Expr] = []
    seen = set()
    for s in walk_statements(loop.body):
        if not isinstance(s, Assign) or s.target != variable:
            continue
        v = s.value
        if not isinstance(v, Binary) or v.op not in ("+", "-"):
            continue
        me = Var(variable, ty=Type.INT)
        if v.op == "+" and v.left == me and _loop_constant(v.right, loop):
            inv = Binary("-", me, v.right, ty=Type.INT)
        elif v.op == "+" and v.right == me and _loop_constant(v.left, loop):
            inv = Binary("-", me, v.left, ty=Type.INT)
        elif v.op == "-" and v.left == me and _loop_constant(v.right, loop):
            inv = Binary("+", me, v.right, ty=Type.INT)
        else:
            continue
        key = alpha_key(inv)
        if key not in seen:
            seen.add(key)
            out.append(inv)
    return out


# --------------------------------------------------------------------------
# relaxation


def relaxable_constants(post: Expr, loop: LoopInfo) -> list[Expr]:
    """Distinct loop-constant sub-expressions: free identifiers that are not
    targets, loop-constant map selections, then integer literals."""
    out: list[Expr] = []
    seen = set()
    for cls in (ID, MAP, NUMBER):
        for occ in subexpressions(post, cls):
            e = occ.subexpression
            if occ.bound or e in seen:
                continue
            if cls == ID and e.name in loop.targets:
                continue
            if cls == MAP and not _loop_constant(e, loop):
                continue
            seen.add(e)
            out.append(e)
    return out


def _replacements(variable: str, loop: LoopInfo, level: HeuristicLevel) -> list[tuple[Expr, bool]]:
    ty = loop.target_types.get(variable)
    out: list[tuple[Expr, bool]] = [(Var(variable, ty=ty), False)]
    if level.enable_aging and ty == Type.INT:
        out += [(a, True) for a in aging(variable, loop)]
    return out


def _variables_for(constant: Expr, loop: LoopInfo, exclude: str = "") -> list[str]:
    return [v for v in loop.sorted_targets()
            if v != exclude and loop.target_types.get(v) == constant.ty]


def coupled_weakenings(post: Expr, constant: Expr, variable: str, loop: LoopInfo,
                       level: HeuristicLevel = DEFAULT_LEVEL) -> list[tuple[Expr, TraceStep]]:
    return [(replace_all(post, constant, new), TraceStep("relax", constant, new, None, aged))
            for new, aged in _replacements(variable, loop, level)]


def uncoupled_weakenings(post: Expr, constant: Expr, variable: str, loop: LoopInfo,
                         level: HeuristicLevel = DEFAULT_LEVEL) -> list[tuple[Expr, TraceStep]]:
    out = []
    for n in range(1, count_occurrences(post, constant) + 1):
        for new, aged in _replacements(variable, loop, level):
            out.append((replace_nth(post, constant, new, n),
                        TraceStep("uncouple", constant, new, n, aged)))
    return out


def _double_uncoupled(post: Expr, constant: Expr, loop: LoopInfo, level: HeuristicLevel,
                      exclude: str = "") -> list[tuple[Expr, tuple[TraceStep, ...]]]:
    k = count_occurrences(post, constant)
    names = _variables_for(constant, loop, exclude)
    out = []
    for p in range(1, k + 1):
        for q in range(p + 1, k + 1):
            for v1 in names:
                for v2 in names:
                    if v1 == v2:
                        continue
                    for e1, a1 in _replacements(v1, loop, level):
                        for e2, a2 in _replacements(v2, loop, level):
                            # later occurrence first so position p is unaffected
                            f = replace_nth(replace_nth(post, constant, e2, q), constant, e1, p)
                            out.append((f, (TraceStep("uncouple", constant, e2, q, a2),
                                            TraceStep("uncouple", constant, e1, p, a1))))
    return out


def build_weakenings(post: Expr, loop: LoopInfo, level: HeuristicLevel = DEFAULT_LEVEL,
                     origin: int = 0, prefix: tuple[TraceStep, ...] = ()) -> list[Candidate]:
    """The unchanged ``post`` followed by all its weakenings w.r.t. ``loop``."""
    out: list[Candidate] = []
    seen = set()

    def add(f: Expr, steps: tuple[TraceStep, ...]) -> None:
        key = alpha_key(f)
        if key not in seen:
            seen.add(key)
            out.append(Candidate(f, origin, prefix + steps, loop.id))

    add(post, ())
    for constant in relaxable_constants(post, loop):
        for variable in _variables_for(constant, loop):
            if level.enable_relaxation:
                for f, step in coupled_weakenings(post, constant, variable, loop, level):
                    add(f, (step,))
            if level.enable_uncoupling:
                for f, step in uncoupled_weakenings(post, constant, variable, loop, level):
                    add(f, (step,))
        if level.enable_double_uncoupling:
            for f, steps in _double_uncoupled(post, constant, loop, level):
                add(f, steps)

    # a target that occurs several times can be uncoupled from itself,
    # e.g. the second Result in `Result * Result == a` becomes y
    if level.enable_uncoupling:
        for t in loop.sorted_targets():
            target = Var(t, ty=loop.target_types.get(t))
            if count_occurrences(post, target) < 2:
                continue
            for variable in _variables_for(target, loop, exclude=t):
                for f, step in uncoupled_weakenings(post, target, variable, loop, level):
                    add(f, (step,))
            if level.enable_double_uncoupling:
                for f, steps in _double_uncoupled(post, target, loop, level, exclude=t):
                    add(f, steps)
    return out


def generate_candidates(proc: ProcedureDecl, program: Program,
                        level: HeuristicLevel = DEFAULT_LEVEL) -> list[Candidate]:
    """All weakenings of all postconditions for all outer loops, deduplicated
    up to alpha-equivalence, ordered by ensures clause then generation order."""
    loops = outer_loops(proc, program) if proc.body is not None else []
    if not loops:
        return []
    out: list[Candidate] = []
    seen = set()
    for origin, prefix, post in _sources(proc, program, level):
        for loop in loops:
            for cand in build_weakenings(post, loop, level, origin, prefix):
                key = alpha_key(cand.formula)
                if key not in seen:
                    seen.add(key)
                    out.append(cand)
    return out


def replay(cand: Candidate, proc: ProcedureDecl, program: Program) -> Expr:
    """Re-apply the candidate's trace to its ensures clause."""
    f = _clauses(proc, program)[cand.origin]
    for step in cand.trace:
        if step.heuristic == "drop":
            f = conjuncts(f)[step.conjunct]
        elif step.position is None:
            f = replace_all(f, step.old, step.new)
        else:
            f = replace_nth(f, step.old, step.new, step.position)
    return f
