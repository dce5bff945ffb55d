"""SMT-LIB v2 encoding of verification conditions and a subprocess driver.

Products of two non-literal terms and divisions by a non-literal become
uninterpreted functions so every script stays in AUFLIA. Such an
abstraction only over-approximates, so ``unsat`` stays a proof while
``sat`` is reported as unknown.
"""

from __future__ import annotations

import hashlib
import os
import shutil
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import SolverError
from .syntax import (
    Apply, Binary, BoolLit, Expr, IntLit, Program, Quant, Select, Store, Type,
    Unary, Var, free_vars, preorder,
)
from .wp import VerificationCondition

VALID, INVALID, UNKNOWN = "valid", "invalid", "unknown"
DEFAULT_TIMEOUT = 10.0
SOLVER_ENV = "INVFORGE_SOLVER"

_SORT = {Type.INT: "Int", Type.BOOL: "Bool", Type.MAP: "(Array Int Int)"}
_OPS = {
    "+": "+", "-": "-", "*": "*", "/": "div", "==": "=", "<": "<", "<=": "<=",
    ">": ">", ">=": ">=", "&&": "and", "||": "or", "==>": "=>",
}


@dataclass(frozen=True)
class Verdict:
    kind: str  # VALID, INVALID or UNKNOWN
    detail: str = ""  # model hint for INVALID, reason for UNKNOWN

    @property
    def valid(self) -> bool:
        return self.kind == VALID

    def to_json(self) -> dict:
        return {"verdict": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class SmtScript:
    text: str
    abstracted: bool  # nonlinear terms replaced by uninterpreted functions

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()


def _sym(name: str) -> str:
    return f"|{name}|"


def _fun(name: str) -> str:
    return f"|f.{name}|"


class _Encoder:
    def __init__(self):
        self.nonlinear: set[str] = set()

    def term(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return str(e.value) if e.value >= 0 else f"(- {-e.value})"
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, Var):
            return _sym(e.name)
        if isinstance(e, Select):
            return f"(select {self.term(e.map)} {self.term(e.index)})"
        if isinstance(e, Store):
            return f"(store {self.term(e.map)} {self.term(e.index)} {self.term(e.value)})"
        if isinstance(e, Unary):
            return f"({'-' if e.op == '-' else 'not'} {self.term(e.operand)})"
        if isinstance(e, Binary):
            a, b = self.term(e.left), self.term(e.right)
            if e.op == "!=":
                return f"(not (= {a} {b}))"
            if e.op == "*" and not (_literal(e.left) or _literal(e.right)):
                self.nonlinear.add("nl_mul")
                return f"(|nl_mul| {a} {b})"
            if e.op == "/" and not (_literal(e.right) and e.right.value != 0):
                self.nonlinear.add("nl_div")
                return f"(|nl_div| {a} {b})"
            return f"({_OPS[e.op]} {a} {b})"
        if isinstance(e, Quant):
            binders = " ".join(f"({_sym(b.name)} {_SORT[t]})" for b, t in zip(e.binders, e.types))
            return f"({e.kind} ({binders}) {self.term(e.body)})"
        if isinstance(e, Apply):
            if not e.args:
                return _fun(e.func)
            return f"({_fun(e.func)} {' '.join(self.term(a) for a in e.args)})"
        raise TypeError(f"cannot encode {e!r}")


def _literal(e: Expr) -> bool:
    return isinstance(e, IntLit) or (
        isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, IntLit))


def _free_symbols(e: Expr) -> dict[str, Type]:
    free = free_vars(e)
    out: dict[str, Type] = {}
    for node in preorder(e):
        if isinstance(node, Var) and node.name in free:
            out.setdefault(node.name, node.ty)
    return out


def encode(vc: VerificationCondition, program: Program) -> SmtScript:
    enc = _Encoder()
    decls = []
    for f in program.functions:
        params = " ".join(f"({_sym(p.name)} {_SORT[p.type]})" for p in f.params)
        if f.body is None:
            sorts = " ".join(_SORT[p.type] for p in f.params)
            decls.append(f"(declare-fun {_fun(f.name)} ({sorts}) {_SORT[f.returns]})")
        else:
            decls.append(f"(define-fun {_fun(f.name)} ({params}) {_SORT[f.returns]} "
                         f"{enc.term(f.body)})")
    axioms = [f"(assert {enc.term(a)})" for a in program.axioms]
    goal = enc.term(vc.formula)
    consts = [f"(declare-const {_sym(n)} {_SORT[t]})"
              for n, t in sorted(_free_symbols(vc.formula).items())]
    lines = [
        f"; {vc.label}",
        "(set-option :produce-models true)",
        "(set-logic AUFLIA)",
    ]
    if "nl_mul" in enc.nonlinear:
        lines.append("(declare-fun |nl_mul| (Int Int) Int)")
    if "nl_div" in enc.nonlinear:
        lines.append("(declare-fun |nl_div| (Int Int) Int)")
    lines += decls + axioms + consts
    lines += [f"(assert (not {goal}))", "(check-sat)"]
    return SmtScript("\n".join(lines) + "\n", bool(enc.nonlinear))


def emit_smtlib(vc: VerificationCondition, program: Program) -> str:
    return encode(vc, program).text


# --------------------------------------------------------------------------
# solver process


def find_solver(explicit: Optional[str] = None) -> str:
    """Solver path from the argument, then INVFORGE_SOLVER, then ``z3`` on PATH."""
    for candidate in (explicit, os.environ.get(SOLVER_ENV), "z3"):
        if not candidate:
            continue
        path = shutil.which(candidate)
        if path:
            return path
        if explicit or candidate != "z3":
            raise SolverError(f"solver executable not found: {candidate}")
    raise SolverError(f"no SMT solver found; pass --solver or set {SOLVER_ENV}")


# Cap on quantifier instantiations. Recursive axioms such as a prefix-sum
# recurrence otherwise send E-matching into an endless chain; hitting the
# cap yields "unknown", never a wrong verdict.
Z3_MAX_INSTANCES = 5000


def _solver_args(path: str, timeout: float) -> list[str]:
    name = Path(path).name.lower()
    ms = max(1, int(timeout * 1000))
    if name.startswith("z3"):
        return ["-smt2", "-in", f"-t:{ms}", f"smt.qi.max_instances={Z3_MAX_INSTANCES}"]
    if name.startswith("cvc5") or name.startswith("cvc4"):
        return ["--lang=smt2", "--incremental", f"--tlimit-per={ms}"]
    return []


class Solver:
    """Runs one solver process per query; verdicts are cached by script hash."""

    def __init__(self, path: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT,
                 keep_dir: Optional[Path] = None):
        self.path = find_solver(path)
        self.timeout = timeout
        self.keep_dir = Path(keep_dir) if keep_dir else None
        if self.keep_dir:
            self.keep_dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, Verdict] = {}
        self._lock = threading.Lock()
        self.calls = 0
        self.hits = 0

    def check(self, vc: VerificationCondition, program: Program, name: str = "") -> Verdict:
        return self.check_script(encode(vc, program), name)

    def check_script(self, script: SmtScript, name: str = "") -> Verdict:
        key = script.digest
        with self._lock:
            if key in self._cache:
                self.hits += 1
                return self._cache[key]
        if self.keep_dir:
            stem = f"{name}-{key[:12]}" if name else key[:16]
            (self.keep_dir / f"{_safe(stem)}.smt2").write_text(script.text)
        verdict = self._run(script.text)
        if verdict.kind == INVALID and script.abstracted:
            verdict = Verdict(UNKNOWN, "incompleteness: nonlinear arithmetic abstracted")
        with self._lock:
            self.calls += 1
            self._cache.setdefault(key, verdict)
            return self._cache[key]

    def _run(self, text: str) -> Verdict:
        cmd = [self.path, *_solver_args(self.path, self.timeout)]
        try:
            proc = subprocess.Popen(cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                    stderr=subprocess.PIPE, text=True)
        except OSError as exc:
            raise SolverError(f"cannot launch solver {self.path}: {exc}") from exc
        killed = threading.Event()

        def kill():
            killed.set()
            proc.kill()

        watchdog = threading.Timer(self.timeout + 5.0, kill)
        watchdog.start()
        try:
            try:
                proc.stdin.write(text)
                proc.stdin.flush()
            except BrokenPipeError:
                pass
            answer, junk = "", []
            while True:
                line = proc.stdout.readline()
                if not line:
                    break
                line = line.strip()
                if line in ("sat", "unsat", "unknown"):
                    answer = line
                    break
                if line:
                    junk.append(line)
            if killed.is_set():
                return Verdict(UNKNOWN, "timeout")
            if not answer or any(j.startswith("(error") for j in junk):
                err = proc.stderr.read() if proc.poll() is not None else ""
                raise SolverError("unexpected solver output: "
                                  + " | ".join(junk + [err.strip()])[:500])
            follow = {"sat": "(get-model)\n", "unknown": "(get-info :reason-unknown)\n"}
            try:
                proc.stdin.write(follow.get(answer, "") + "(exit)\n")
                proc.stdin.close()
            except BrokenPipeError:
                pass
            rest = proc.stdout.read().strip()
            if killed.is_set():
                return Verdict(UNKNOWN, "timeout")
        finally:
            watchdog.cancel()
            proc.wait()
        if answer == "unsat":
            return Verdict(VALID)
        if answer == "sat":
            return Verdict(INVALID, rest[:2000])
        reason = "timeout" if ("timeout" in rest or "canceled" in rest) else "incompleteness"
        return Verdict(UNKNOWN, reason)


def _safe(stem: str) -> str:
    return "".join(c if c.isalnum() or c in "-_.@" else "_" for c in stem)
