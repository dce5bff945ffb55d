"""Bounded concrete execution, used to cross-check verified invariants.

Arrays are total maps built from a short list: position k reads the list
at k clamped into 1..len, an empty list reads 0 everywhere. Quantifiers
range over a fixed window of integers. Logic functions without a body
need a Python model supplied by the caller.
"""

from __future__ import annotations

import itertools
import operator
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional

from .analysis import all_loops
from .printer import expr_str
from .syntax import (
    Apply, Assert, Assign, Assume, Binary, BoolLit, Call, Expr, Havoc, If,
    IntLit, ProcedureDecl, Program, Quant, Select, Stmt, Store, Type, Unary,
    Var, While, conjuncts, free_vars,
)

QUANT_WINDOW = range(-8, 9)
VALUE_RANGE = range(-4, 5)
MAX_ARRAY_LEN = 4


class Stop(Exception):
    """The run leaves the modelled fragment (havoc, division by zero, ...)."""


@dataclass(frozen=True)
class ArrayValue:
    cells: tuple[int, ...]
    writes: tuple[tuple[int, int], ...] = ()

    def get(self, k: int) -> int:
        for key, v in reversed(self.writes):
            if key == k:
                return v
        if not self.cells:
            return 0
        return self.cells[min(max(k, 1), len(self.cells)) - 1]

    def set(self, k: int, v: int) -> "ArrayValue":
        return ArrayValue(self.cells, self.writes + ((k, v),))

    def window(self) -> tuple[int, ...]:
        keys = set(QUANT_WINDOW) | {k for k, _ in self.writes}
        return tuple(self.get(k) for k in sorted(keys))

    def __eq__(self, other):
        return isinstance(other, ArrayValue) and self.window() == other.window()

    def __hash__(self):
        return hash(self.window())


def euclid_div(a: int, b: int) -> int:
    if b == 0:
        raise Stop("division by zero")
    r = a % abs(b)
    return (a - r) // b


class Interpreter:
    def __init__(self, program: Program, models: Optional[Mapping[str, Callable]] = None,
                 max_iterations: int = 100, narrow: bool = True):
        self.program = program
        self.models = dict(models or {})
        self.max_iterations = max_iterations
        self.narrow = narrow  # restrict binder ranges by the quantifier guard
        self._plans: dict[int, tuple[Quant, list]] = {}

    # expressions --------------------------------------------------------

    def eval(self, e: Expr, env: Mapping[str, object]):
        return self._dispatch[type(e)](self, e, env)

    def _lit(self, e, env):
        return e.value

    def _var(self, e, env):
        return env[e.name]

    def _select(self, e, env):
        return self.eval(e.map, env).get(self.eval(e.index, env))

    def _store(self, e, env):
        return self.eval(e.map, env).set(self.eval(e.index, env), self.eval(e.value, env))

    def _unary(self, e, env):
        v = self.eval(e.operand, env)
        return -v if e.op == "-" else not v

    def _apply(self, e, env):
        args = [self.eval(a, env) for a in e.args]
        f = self.program.function(e.func)
        if f.body is not None:
            return self.eval(f.body, {p.name: a for p, a in zip(f.params, args)})
        if e.func not in self.models:
            raise Stop(f"no model for function {e.func}")
        return self.models[e.func](*args)

    def _binary(self, e: Binary, env):
        op = e.op
        if op == "&&":
            return self.eval(e.left, env) and self.eval(e.right, env)
        if op == "||":
            return self.eval(e.left, env) or self.eval(e.right, env)
        if op == "==>":
            return (not self.eval(e.left, env)) or self.eval(e.right, env)
        a, b = self.eval(e.left, env), self.eval(e.right, env)
        if op == "/":
            return euclid_div(a, b)
        return _ARITH[op](a, b)

    def _quant(self, e: Quant, env):
        if any(t != Type.INT for t in e.types):
            raise Stop("quantifier over a non-integer type")
        names = [b.name for b in e.binders]
        is_forall = e.kind == "forall"
        plan = self._plan(e)
        inner = dict(env)

        def go(k: int) -> bool:
            if k == len(names):
                return bool(self.eval(e.body, inner))
            lo, hi = self._range(plan[k], inner)
            for x in range(lo, hi + 1):
                inner[names[k]] = x
                if go(k + 1) != is_forall:
                    return not is_forall
            return is_forall

        return go(0)

    def _plan(self, e: Quant) -> list[list[tuple[str, Expr]]]:
        """Per binder, the guard comparisons ``binder op expr`` whose right
        side only mentions variables bound before it."""
        hit = self._plans.get(id(e))
        if hit is not None and hit[0] is e:
            return hit[1]
        guard = _guard(e) if self.narrow else []
        names = [b.name for b in e.binders]
        plan = []
        for k, name in enumerate(names):
            unbound = set(names[k:])
            bounds = []
            for part in guard:
                if not isinstance(part, Binary) or part.op not in _FLIP:
                    continue
                if part.left == Var(name):
                    op, other = part.op, part.right
                elif part.right == Var(name):
                    op, other = _FLIP[part.op], part.left
                else:
                    continue
                if not free_vars(other) & unbound:
                    bounds.append((op, other))
            plan.append(bounds)
        self._plans[id(e)] = (e, plan)
        return plan

    def _range(self, bounds: list[tuple[str, Expr]], env) -> tuple[int, int]:
        """Sub-range of the window outside which the guard is false."""
        lo, hi = QUANT_WINDOW.start, QUANT_WINDOW.stop - 1
        for op, other in bounds:
            try:
                c = self.eval(other, env)
            except Stop:
                continue
            if op in ("<=", "=="):
                hi = min(hi, c)
            if op == "<":
                hi = min(hi, c - 1)
            if op in (">=", "=="):
                lo = max(lo, c)
            if op == ">":
                lo = max(lo, c + 1)
        return lo, hi

    _dispatch = {
        IntLit: _lit, BoolLit: _lit, Var: _var, Select: _select, Store: _store,
        Unary: _unary, Binary: _binary, Quant: _quant, Apply: _apply,
    }

    # statements ---------------------------------------------------------

    def run(self, proc: ProcedureDecl, env: dict[str, object],
            on_head: Callable[[str, dict], None]) -> dict[str, object]:
        """Execute ``proc`` from ``env``; ``on_head`` sees every loop-head state."""
        self._block(proc.body or (), env, proc.name, on_head)
        return env

    def _block(self, stmts, env, prefix, on_head):
        for k, s in enumerate(stmts):
            self._stmt(s, env, f"{prefix}[{k}]", on_head)

    def _stmt(self, s: Stmt, env, here, on_head):
        if isinstance(s, Assign):
            env[s.target] = self.eval(s.value, env)
        elif isinstance(s, (Assert, Assume)):
            if not self.eval(s.formula, env):
                raise Stop("assumption or assertion failed")
        elif isinstance(s, Havoc):
            raise Stop("havoc")
        elif isinstance(s, If):
            if self.eval(s.cond, env):
                self._block(s.then, env, here + ".then", on_head)
            else:
                self._block(s.orelse, env, here + ".else", on_head)
        elif isinstance(s, While):
            for _ in range(self.max_iterations):
                on_head(here, env)
                if not self.eval(s.guard, env):
                    return
                self._block(s.body, env, here, on_head)
            on_head(here, env)
            raise Stop("iteration bound reached")
        elif isinstance(s, Call):
            self._call(s, env)
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def _call(self, s: Call, env):
        callee = self.program.procedure(s.proc)
        if callee.body is None:
            raise Stop(f"procedure {s.proc} has no body")
        inner = {g.name: env[g.name] for g in self.program.globals}
        for d, a in zip(callee.ins, s.args):
            inner[d.name] = self.eval(a, env)
        for d in (*callee.outs, *callee.locals):
            inner[d.name] = default_value(d.type)
        self._block(callee.body, inner, callee.name, lambda *_: None)
        for g in callee.modifies:
            env[g] = inner[g]
        for o, d in zip(s.outs, callee.outs):
            env[o] = inner[d.name]


_ARITH = {
    "+": operator.add, "-": operator.sub, "*": operator.mul, "==": operator.eq,
    "!=": operator.ne, "<": operator.lt, "<=": operator.le, ">": operator.gt,
    ">=": operator.ge,
}
# the relation seen from the right operand
_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "=="}


def _guard(e: Quant) -> list[Expr]:
    """Conjuncts that must hold for the body to matter: the premise of a
    universal implication, or the body of an existential conjunction."""
    if e.kind == "forall" and isinstance(e.body, Binary) and e.body.op == "==>":
        return conjuncts(e.body.left)
    if e.kind == "exists":
        return conjuncts(e.body)
    return []


def default_value(ty: Type):
    if ty == Type.BOOL:
        return False
    if ty == Type.MAP:
        return ArrayValue(())
    return 0


# --------------------------------------------------------------------------
# input enumeration


def _array_values() -> Iterator[ArrayValue]:
    for n in range(MAX_ARRAY_LEN + 1):
        for cells in itertools.product(VALUE_RANGE, repeat=n):
            yield ArrayValue(tuple(cells))


def _domain_size(types: list[Type]) -> int:
    arrays = sum(len(VALUE_RANGE) ** n for n in range(MAX_ARRAY_LEN + 1))
    size = 1
    for t in types:
        size *= {Type.INT: len(VALUE_RANGE), Type.BOOL: 2, Type.MAP: arrays}[t]
    return size


def _random_value(rng: random.Random, ty: Type):
    if ty == Type.INT:
        return rng.choice(VALUE_RANGE)
    if ty == Type.BOOL:
        return rng.random() < 0.5
    cells = [rng.choice(VALUE_RANGE) for _ in range(rng.randint(0, MAX_ARRAY_LEN))]
    if rng.random() < 0.5:
        cells.sort()  # many preconditions ask for sorted arrays
    return ArrayValue(tuple(cells))


def initial_states(proc: ProcedureDecl, program: Program, limit: int = 20000,
                   seed: int = 0) -> Iterator[dict[str, object]]:
    """Every combination of inputs (globals and parameters) over the bounded
    domain when there are at most ``limit`` of them, otherwise ``limit``
    states drawn with a fixed seed. Outputs and locals start arbitrary, as
    they do for the verifier, so they are always drawn at random."""
    rng = random.Random(seed)
    inputs = [*program.globals, *proc.ins]
    rest = [*proc.outs, *proc.locals]

    def arbitrary(decls):
        return {d.name: _random_value(rng, d.type) for d in decls}

    if _domain_size([d.type for d in inputs]) <= limit:
        pools = [list(VALUE_RANGE) if d.type == Type.INT else [False, True]
                 if d.type == Type.BOOL else list(_array_values()) for d in inputs]
        for values in itertools.product(*pools):
            yield {**dict(zip((d.name for d in inputs), values)), **arbitrary(rest)}
        return
    for _ in range(limit):
        yield arbitrary(inputs + rest)


@dataclass
class Violation:
    loop: str
    formula: Expr
    state: dict

    def __str__(self):
        shown = {k: (v.cells if isinstance(v, ArrayValue) else v) for k, v in self.state.items()}
        return f"{expr_str(self.formula)} fails at {self.loop} in state {shown}"


@dataclass
class CrossCheck:
    runs: int
    loop_visits: int
    violations: list[Violation]


def cross_check(program: Program, proc: ProcedureDecl, invariants: Mapping[str, list[Expr]],
                models: Optional[Mapping[str, Callable]] = None, limit: int = 20000,
                seed: int = 0, max_violations: int = 5) -> CrossCheck:
    """Run ``proc`` on bounded inputs satisfying its preconditions and evaluate
    ``invariants`` (loop id to formulas) at every loop-head visit."""
    interp = Interpreter(program, models)
    known = {lp.id for lp in all_loops(proc, program)}
    unknown_ids = set(invariants) - known
    if unknown_ids:
        raise KeyError(f"unknown loop ids {sorted(unknown_ids)}")
    runs = visits = 0
    violations: list[Violation] = []

    def on_head(loop_id, env):
        nonlocal visits
        visits += 1
        for f in invariants.get(loop_id, ()):
            try:
                ok = interp.eval(f, env)
            except Stop:
                continue
            if not ok and len(violations) < max_violations:
                violations.append(Violation(loop_id, f, dict(env)))

    for state in initial_states(proc, program, limit, seed):
        try:
            if not all(interp.eval(r, state) for r in proc.requires):
                continue
        except Stop:
            continue
        runs += 1
        try:
            interp.run(proc, state, on_head)
        except Stop:
            pass
    return CrossCheck(runs, visits, violations)
