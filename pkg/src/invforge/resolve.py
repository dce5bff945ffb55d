"""Name resolution and type checking.

Returns a copy of the program in which every expression node carries its
type tag.  The first error raises.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping, Optional

from .errors import ResolutionError, TypeCheckError
from .syntax import (
    Apply, Assert, Assign, Assume, Binary, BoolLit, Call, Expr, FunctionDecl,
    Havoc, If, IntLit, ProcedureDecl, Program, Quant, Select, Stmt, Store,
    Type, Unary, Var, While,
)

_ARITH = {"+", "-", "*", "/"}
_ORDER = {"<", "<=", ">", ">="}
_EQ = {"==", "!="}
_LOGIC = {"&&", "||", "==>"}


def check_expr(e: Expr, env: Mapping[str, Type], functions: Mapping[str, FunctionDecl],
               expected: Optional[Type] = None) -> Expr:
    """Type-annotate ``e`` under variable environment ``env``."""
    out = _expr(e, env, functions)
    if expected is not None and out.ty != expected:
        raise TypeCheckError(f"expected {expected}, got {out.ty}", e.span)
    return out


def _expr(e: Expr, env: Mapping[str, Type], funcs: Mapping[str, FunctionDecl]) -> Expr:
    if isinstance(e, IntLit):
        return replace(e, ty=Type.INT)
    if isinstance(e, BoolLit):
        return replace(e, ty=Type.BOOL)
    if isinstance(e, Var):
        if e.name not in env:
            raise ResolutionError(f"undeclared identifier '{e.name}'", e.span)
        return replace(e, ty=env[e.name])
    if isinstance(e, Select):
        m = _want(_expr(e.map, env, funcs), Type.MAP)
        i = _want(_expr(e.index, env, funcs), Type.INT)
        return Select(m, i, span=e.span, ty=Type.INT)
    if isinstance(e, Store):
        m = _want(_expr(e.map, env, funcs), Type.MAP)
        i = _want(_expr(e.index, env, funcs), Type.INT)
        v = _want(_expr(e.value, env, funcs), Type.INT)
        return Store(m, i, v, span=e.span, ty=Type.MAP)
    if isinstance(e, Unary):
        want = Type.INT if e.op == "-" else Type.BOOL
        operand = _want(_expr(e.operand, env, funcs), want)
        return Unary(e.op, operand, span=e.span, ty=want)
    if isinstance(e, Binary):
        left = _expr(e.left, env, funcs)
        right = _expr(e.right, env, funcs)
        if e.op in _ARITH:
            return Binary(e.op, _want(left, Type.INT), _want(right, Type.INT),
                          span=e.span, ty=Type.INT)
        if e.op in _ORDER:
            return Binary(e.op, _want(left, Type.INT), _want(right, Type.INT),
                          span=e.span, ty=Type.BOOL)
        if e.op in _EQ:
            if left.ty != right.ty:
                raise TypeCheckError(
                    f"operands of '{e.op}' have different types ({left.ty}, {right.ty})", e.span)
            return Binary(e.op, left, right, span=e.span, ty=Type.BOOL)
        if e.op in _LOGIC:
            return Binary(e.op, _want(left, Type.BOOL), _want(right, Type.BOOL),
                          span=e.span, ty=Type.BOOL)
        raise TypeCheckError(f"unknown operator '{e.op}'", e.span)
    if isinstance(e, Quant):
        inner = dict(env)
        binders = []
        seen = set()
        for b, t in zip(e.binders, e.types):
            if b.name in seen:
                raise ResolutionError(f"duplicate bound variable '{b.name}'", b.span)
            seen.add(b.name)
            inner[b.name] = t
            binders.append(replace(b, ty=t))
        body = _want(_expr(e.body, inner, funcs), Type.BOOL)
        return Quant(e.kind, tuple(binders), e.types, body, span=e.span, ty=Type.BOOL)
    if isinstance(e, Apply):
        if e.func not in funcs:
            raise ResolutionError(f"undeclared function '{e.func}'", e.span)
        f = funcs[e.func]
        if len(f.params) != len(e.args):
            raise TypeCheckError(
                f"function '{e.func}' expects {len(f.params)} arguments, got {len(e.args)}",
                e.span)
        args = tuple(_want(_expr(a, env, funcs), p.type) for a, p in zip(e.args, f.params))
        return Apply(e.func, args, span=e.span, ty=f.returns)
    raise TypeCheckError(f"unexpected expression {e!r}", e.span)


def _want(e: Expr, ty: Type) -> Expr:
    if e.ty != ty:
        raise TypeCheckError(f"expected {ty}, got {e.ty}", e.span)
    return e


def check_program(program: Program) -> Program:
    globals_: dict[str, Type] = {}
    for g in program.globals:
        if g.name in globals_:
            raise ResolutionError(f"duplicate global '{g.name}'", g.span)
        globals_[g.name] = g.type

    funcs: dict[str, FunctionDecl] = {}
    functions = []
    for f in program.functions:
        if f.name in funcs:
            raise ResolutionError(f"duplicate function '{f.name}'", f.span)
        params = {}
        for p in f.params:
            if p.name in params:
                raise ResolutionError(f"duplicate parameter '{p.name}'", p.span)
            params[p.name] = p.type
        body = None
        if f.body is not None:
            # bodies see only earlier functions: no recursion
            body = check_expr(f.body, params, funcs, f.returns)
        checked = replace(f, body=body)
        funcs[f.name] = checked
        functions.append(checked)

    axioms = []
    for a in program.axioms:
        axioms.append(check_expr(a, {}, funcs, Type.BOOL))

    procs: dict[str, ProcedureDecl] = {}
    for p in program.procedures:
        if p.name in procs:
            raise ResolutionError(f"duplicate procedure '{p.name}'", p.span)
        if p.name in funcs:
            raise ResolutionError(f"'{p.name}' is already a function", p.span)
        procs[p.name] = p

    procedures = [_check_procedure(p, globals_, funcs, procs) for p in program.procedures]
    return Program(program.globals, tuple(functions), tuple(axioms), tuple(procedures))


def _check_procedure(p: ProcedureDecl, globals_: Mapping[str, Type],
                     funcs: Mapping[str, FunctionDecl],
                     procs: Mapping[str, ProcedureDecl]) -> ProcedureDecl:
    scope: dict[str, Type] = {}
    for d in (*p.ins, *p.outs, *p.locals):
        if d.name in scope or d.name in globals_:
            raise ResolutionError(f"'{d.name}' is declared twice in procedure '{p.name}'",
                                  d.span)
        scope[d.name] = d.type
    for m in p.modifies:
        if m not in globals_:
            raise ResolutionError(f"modifies clause names '{m}', which is not a global",
                                  p.span)

    pre_env = {**globals_, **{d.name: d.type for d in p.ins}}
    post_env = {**pre_env, **{d.name: d.type for d in p.outs}}
    requires = tuple(check_expr(r, pre_env, funcs, Type.BOOL) for r in p.requires)
    ensures = tuple(check_expr(e, post_env, funcs, Type.BOOL) for e in p.ensures)

    body = None
    if p.body is not None:
        env = {**globals_, **scope}
        writable = {d.name for d in (*p.outs, *p.locals)} | set(p.modifies)
        ctx = _BodyCtx(p, env, writable, globals_, funcs, procs)
        body = ctx.block(p.body)
    return replace(p, requires=requires, ensures=ensures, body=body)


class _BodyCtx:
    def __init__(self, proc, env, writable, globals_, funcs, procs):
        self.proc = proc
        self.env = env
        self.writable = writable
        self.globals = globals_
        self.funcs = funcs
        self.procs = procs

    def expr(self, e: Expr, ty: Optional[Type] = None) -> Expr:
        return check_expr(e, self.env, self.funcs, ty)

    def assignable(self, name: str, span) -> Type:
        if name not in self.env:
            raise ResolutionError(f"undeclared identifier '{name}'", span)
        if name not in self.writable:
            if name in self.globals:
                raise ResolutionError(
                    f"global '{name}' is assigned but missing from the modifies clause", span)
            raise ResolutionError(f"input parameter '{name}' cannot be assigned", span)
        return self.env[name]

    def block(self, stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        return tuple(self.stmt(s) for s in stmts)

    def stmt(self, s: Stmt) -> Stmt:
        if isinstance(s, Assert):
            return replace(s, formula=self.expr(s.formula, Type.BOOL))
        if isinstance(s, Assume):
            return replace(s, formula=self.expr(s.formula, Type.BOOL))
        if isinstance(s, Havoc):
            for n in s.names:
                self.assignable(n, s.span)
            return s
        if isinstance(s, Assign):
            ty = self.assignable(s.target, s.span)
            return replace(s, value=self.expr(s.value, ty))
        if isinstance(s, Call):
            if s.proc not in self.procs:
                raise ResolutionError(f"undeclared procedure '{s.proc}'", s.span)
            callee = self.procs[s.proc]
            if len(callee.ins) != len(s.args):
                raise TypeCheckError(
                    f"procedure '{s.proc}' expects {len(callee.ins)} arguments, "
                    f"got {len(s.args)}", s.span)
            if len(callee.outs) != len(s.outs):
                raise TypeCheckError(
                    f"procedure '{s.proc}' returns {len(callee.outs)} values, "
                    f"{len(s.outs)} targets given", s.span)
            args = tuple(self.expr(a, d.type) for a, d in zip(s.args, callee.ins))
            if len(set(s.outs)) != len(s.outs):
                raise ResolutionError("call assigns the same variable twice", s.span)
            for o, d in zip(s.outs, callee.outs):
                if self.assignable(o, s.span) != d.type:
                    raise TypeCheckError(f"call target '{o}' must have type {d.type}", s.span)
            for g in callee.modifies:
                if g not in self.writable:
                    raise ResolutionError(
                        f"callee '{s.proc}' modifies '{g}', which the caller does not list",
                        s.span)
            return replace(s, args=args)
        if isinstance(s, If):
            return If(self.expr(s.cond, Type.BOOL), self.block(s.then),
                      self.block(s.orelse), span=s.span)
        if isinstance(s, While):
            return While(self.expr(s.guard, Type.BOOL),
                         tuple(self.expr(i, Type.BOOL) for i in s.invariants),
                         self.block(s.body), span=s.span)
        raise TypeCheckError(f"unexpected statement {s!r}", s.span)
