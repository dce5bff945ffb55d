from __future__ import annotations

from .syntax import (
    Apply, Assert, Assign, Assume, Binary, BoolLit, Call, Expr, FunctionDecl,
    Havoc, If, IntLit, ProcedureDecl, Program, Quant, Select, Stmt, Store,
    Unary, Var, VarDecl, While,
)

_PREC = {
    "==>": 1, "||": 2, "&&": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6,
}
_UNARY = 7
_ATOM = 8


def _prec(e: Expr) -> int:
    if isinstance(e, Quant):
        return 0
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) or (isinstance(e, IntLit) and e.value < 0):
        return _UNARY
    return _ATOM


def expr_str(e: Expr, min_prec: int = 0) -> str:
    text = _expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Select):
        return f"{expr_str(e.map, _ATOM)}[{expr_str(e.index)}]"
    if isinstance(e, Store):
        return f"store({expr_str(e.map)}, {expr_str(e.index)}, {expr_str(e.value)})"
    if isinstance(e, Apply):
        return f"{e.func}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, Unary):
        if e.op == "-" and isinstance(e.operand, IntLit) and e.operand.value >= 0:
            # "-1" would read back as a negative literal
            return f"-({e.operand.value})"
        return e.op + expr_str(e.operand, _UNARY)
    if isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "==>":
            lhs, rhs = expr_str(e.left, p + 1), expr_str(e.right, p)
        elif p == 4:
            lhs, rhs = expr_str(e.left, p + 1), expr_str(e.right, p + 1)
        else:
            lhs, rhs = expr_str(e.left, p), expr_str(e.right, p + 1)
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, Quant):
        binders = ", ".join(f"{b.name}: {t}" for b, t in zip(e.binders, e.types))
        return f"{e.kind} {binders} :: {expr_str(e.body)}"
    raise TypeError(f"cannot print {e!r}")


def _decls(ds: tuple[VarDecl, ...]) -> str:
    return ", ".join(f"{d.name}: {d.type}" for d in ds)


def stmt_lines(s: Stmt, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assert):
        return [f"{pad}assert {expr_str(s.formula)};"]
    if isinstance(s, Assume):
        return [f"{pad}assume {expr_str(s.formula)};"]
    if isinstance(s, Havoc):
        return [f"{pad}havoc {', '.join(s.names)};"]
    if isinstance(s, Assign):
        v = s.value
        if isinstance(v, Store) and isinstance(v.map, Var) and v.map.name == s.target:
            return [f"{pad}{s.target}[{expr_str(v.index)}] := {expr_str(v.value)};"]
        return [f"{pad}{s.target} := {expr_str(v)};"]
    if isinstance(s, Call):
        outs = f"{', '.join(s.outs)} := " if s.outs else ""
        args = ", ".join(expr_str(a) for a in s.args)
        return [f"{pad}call {outs}{s.proc}({args});"]
    if isinstance(s, If):
        lines = [f"{pad}if ({expr_str(s.cond)}) {{"]
        lines += block_lines(s.then, indent + 1)
        node = s
        while node.orelse:
            if len(node.orelse) == 1 and isinstance(node.orelse[0], If):
                node = node.orelse[0]
                lines.append(f"{pad}}} else if ({expr_str(node.cond)}) {{")
                lines += block_lines(node.then, indent + 1)
            else:
                lines.append(f"{pad}}} else {{")
                lines += block_lines(node.orelse, indent + 1)
                break
        lines.append(f"{pad}}}")
        return lines
    if isinstance(s, While):
        lines = [f"{pad}while ({expr_str(s.guard)})"]
        lines += [f"{pad}  invariant {expr_str(i)};" for i in s.invariants]
        lines.append(f"{pad}{{")
        lines += block_lines(s.body, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"cannot print {s!r}")


def block_lines(stmts: tuple[Stmt, ...], indent: int) -> list[str]:
    out: list[str] = []
    for s in stmts:
        out += stmt_lines(s, indent)
    return out


def function_str(f: FunctionDecl) -> str:
    head = f"function {f.name}({_decls(f.params)}) returns ({f.returns})"
    if f.body is None:
        return head + ";"
    return f"{head}\n{{\n  {expr_str(f.body)}\n}}"


def procedure_str(p: ProcedureDecl) -> str:
    head = f"procedure {p.name}({_decls(p.ins)})"
    if p.outs:
        head += f" returns ({_decls(p.outs)})"
    lines = [head + (";" if p.body is None else "")]
    lines += [f"  requires {expr_str(r)};" for r in p.requires]
    lines += [f"  ensures {expr_str(e)};" for e in p.ensures]
    if p.modifies:
        lines.append(f"  modifies {', '.join(p.modifies)};")
    if p.body is not None:
        lines.append("{")
        lines += [f"  var {d.name}: {d.type};" for d in p.locals]
        lines += block_lines(p.body, 1)
        lines.append("}")
    return "\n".join(lines)


def pretty_print(program: Program) -> str:
    chunks: list[str] = []
    if program.globals:
        chunks.append("\n".join(f"var {g.name}: {g.type};" for g in program.globals))
    chunks += [function_str(f) for f in program.functions]
    chunks += [f"axiom {expr_str(a)};" for a in program.axioms]
    chunks += [procedure_str(p) for p in program.procedures]
    return "\n\n".join(chunks) + ("\n" if chunks else "")
