"""Abstract syntax for the mini verification language.

Expressions and statements are frozen dataclasses.  Source spans and type
tags are excluded from equality, so ``==`` is structural equality modulo
spans.  Alpha-equivalence (modulo bound-variable names, with ``&&``/``||``
flattened) is available through :func:`alpha_key`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union


class Type(enum.Enum):
    INT = "int"
    BOOL = "bool"
    MAP = "array int"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int = 0
    end_column: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _meta():
    return field(default=None, compare=False, repr=False, kw_only=True)


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Expr:
    span: Optional[Span] = _meta()
    ty: Optional[Type] = _meta()

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Select(Expr):
    map: Expr
    index: Expr

    def children(self):
        return (self.map, self.index)


@dataclass(frozen=True)
class Store(Expr):
    map: Expr
    index: Expr
    value: Expr

    def children(self):
        return (self.map, self.index, self.value)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" or "!"
    operand: Expr

    def children(self):
        return (self.operand,)


ARITH_OPS = ("+", "-", "*", "/")
REL_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("&&", "||", "==>")


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Quant(Expr):
    kind: str  # "forall" or "exists"
    binders: tuple[Var, ...]
    types: tuple[Type, ...]
    body: Expr

    def children(self):
        return (*self.binders, self.body)


@dataclass(frozen=True)
class Apply(Expr):
    func: str
    args: tuple[Expr, ...]

    def children(self):
        return self.args


TRUE = BoolLit(True, ty=Type.BOOL)
FALSE = BoolLit(False, ty=Type.BOOL)


# --------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Stmt:
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Assert(Stmt):
    formula: Expr


@dataclass(frozen=True)
class Assume(Stmt):
    formula: Expr


@dataclass(frozen=True)
class Havoc(Stmt):
    names: tuple[str, ...]


@dataclass(frozen=True)
class Assign(Stmt):
    """``target := value``; map updates arrive here as ``A := store(A, i, e)``."""

    target: str
    value: Expr


@dataclass(frozen=True)
class Call(Stmt):
    outs: tuple[str, ...]
    proc: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class While(Stmt):
    guard: Expr
    invariants: tuple[Expr, ...]
    body: tuple[Stmt, ...]


Statement = Union[Assert, Assume, Havoc, Assign, Call, If, While]


# --------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: Type
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple[VarDecl, ...]
    returns: Type
    body: Optional[Expr] = None
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class ProcedureDecl:
    name: str
    ins: tuple[VarDecl, ...] = ()
    outs: tuple[VarDecl, ...] = ()
    requires: tuple[Expr, ...] = ()
    ensures: tuple[Expr, ...] = ()
    modifies: tuple[str, ...] = ()
    locals: tuple[VarDecl, ...] = ()
    body: Optional[tuple[Stmt, ...]] = None
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Program:
    globals: tuple[VarDecl, ...] = ()
    functions: tuple[FunctionDecl, ...] = ()
    axioms: tuple[Expr, ...] = ()
    procedures: tuple[ProcedureDecl, ...] = ()

    def procedure(self, name: str) -> ProcedureDecl:
        for p in self.procedures:
            if p.name == name:
                return p
        raise KeyError(name)

    def function(self, name: str) -> FunctionDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)


def scope_types(proc: ProcedureDecl, program: Program) -> dict[str, Type]:
    """Types of every variable visible inside ``proc``."""
    env = {g.name: g.type for g in program.globals}
    for d in (*proc.ins, *proc.outs, *proc.locals):
        env[d.name] = d.type
    return env


# --------------------------------------------------------------------------
# Traversal helpers


def preorder(e: Expr) -> Iterator[Expr]:
    """Pre-order walk; quantifier binders are visited before the body."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def free_vars(e: Expr) -> set[str]:
    out: set[str] = set()

    def go(node: Expr, bound: frozenset[str]) -> None:
        if isinstance(node, Var):
            if node.name not in bound:
                out.add(node.name)
        elif isinstance(node, Quant):
            go(node.body, bound | {b.name for b in node.binders})
        else:
            for c in node.children():
                go(c, bound)

    go(e, frozenset())
    return out


def conjuncts(e: Expr) -> list[Expr]:
    """Top-level conjuncts with ``&&`` flattened."""
    if isinstance(e, Binary) and e.op == "&&":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def conj(parts: list[Expr]) -> Expr:
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&&", out, p, ty=Type.BOOL)
    return out


def rebuild(e: Expr, kids: list[Expr]) -> Expr:
    """Copy of ``e`` with its children replaced (span and type kept)."""
    if isinstance(e, Select):
        return Select(kids[0], kids[1], span=e.span, ty=e.ty)
    if isinstance(e, Store):
        return Store(kids[0], kids[1], kids[2], span=e.span, ty=e.ty)
    if isinstance(e, Unary):
        return Unary(e.op, kids[0], span=e.span, ty=e.ty)
    if isinstance(e, Binary):
        return Binary(e.op, kids[0], kids[1], span=e.span, ty=e.ty)
    if isinstance(e, Quant):
        n = len(e.binders)
        return Quant(e.kind, tuple(kids[:n]), e.types, kids[n], span=e.span, ty=e.ty)
    if isinstance(e, Apply):
        return Apply(e.func, tuple(kids), span=e.span, ty=e.ty)
    return e


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Capture-avoiding simultaneous substitution of free variables."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Quant):
        inner = {k: v for k, v in mapping.items() if k not in {b.name for b in e.binders}}
        if not inner:
            return e
        incoming: set[str] = set()
        for v in inner.values():
            incoming |= free_vars(v)
        avoid = incoming | free_vars(e.body) | set(inner)
        binders = []
        for b in e.binders:
            if b.name in incoming:
                fresh = _fresh_name(b.name, avoid)
                avoid.add(fresh)
                inner[b.name] = Var(fresh, ty=b.ty)
                binders.append(Var(fresh, span=b.span, ty=b.ty))
            else:
                binders.append(b)
        return Quant(e.kind, tuple(binders), e.types, substitute(e.body, inner),
                     span=e.span, ty=e.ty)
    kids = e.children()
    if not kids:
        return e
    return rebuild(e, [substitute(k, mapping) for k in kids])


def _fresh_name(base: str, avoid: set[str]) -> str:
    k = 1
    while f"{base}_{k}" in avoid:
        k += 1
    return f"{base}_{k}"


def alpha_key(e: Expr):
    """Hashable canonical form: bound names replaced by binder position,
    associative ``&&``/``||`` chains flattened, spans and types dropped."""

    def go(node: Expr, env: dict[str, int], depth: int):
        if isinstance(node, Var):
            if node.name in env:
                return ("bv", env[node.name])
            return ("v", node.name)
        if isinstance(node, IntLit):
            return ("i", node.value)
        if isinstance(node, BoolLit):
            return ("b", node.value)
        if isinstance(node, Binary) and node.op in ("&&", "||"):
            parts = []
            _flatten(node, node.op, parts)
            return (node.op, tuple(go(p, env, depth) for p in parts))
        if isinstance(node, Binary):
            return (node.op, go(node.left, env, depth), go(node.right, env, depth))
        if isinstance(node, Unary):
            return ("u" + node.op, go(node.operand, env, depth))
        if isinstance(node, Select):
            return ("sel", go(node.map, env, depth), go(node.index, env, depth))
        if isinstance(node, Store):
            return ("sto",) + tuple(go(c, env, depth) for c in node.children())
        if isinstance(node, Apply):
            return ("app", node.func) + tuple(go(a, env, depth) for a in node.args)
        if isinstance(node, Quant):
            inner = dict(env)
            for k, b in enumerate(node.binders):
                inner[b.name] = depth + k
            return (node.kind, tuple(t.value for t in node.types),
                    go(node.body, inner, depth + len(node.binders)))
        raise TypeError(f"unexpected node {node!r}")

    return go(e, {}, 0)


def _flatten(node: Expr, op: str, out: list[Expr]) -> None:
    if isinstance(node, Binary) and node.op == op:
        _flatten(node.left, op, out)
        _flatten(node.right, op, out)
    else:
        out.append(node)


# --------------------------------------------------------------------------
# Statement helpers


def walk_statements(stmts: tuple[Stmt, ...]) -> Iterator[Stmt]:
    """All statements, nested ones included, in source order."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_statements(s.then)
            yield from walk_statements(s.orelse)
        elif isinstance(s, While):
            yield from walk_statements(s.body)
