import pytest

from conftest import load
from invforge.parser import parse_expr, parse_program
from invforge.printer import expr_str
from invforge.resolve import check_expr
from invforge.syntax import TRUE, Type, free_vars, scope_types
from invforge.wp import (
    CONSECUTION, INITIATION, loop_condition, mk_and, mk_implies, mk_not,
    procedure_conditions,
)


def formula(prog, proc, text):
    return check_expr(parse_expr(text), scope_types(proc, prog),
                      {f.name: f for f in prog.functions}, Type.BOOL)


def test_max_initiation_golden_text():
    prog = load("max_v1.ivl")
    proc = prog.procedure("max")
    inv = formula(prog, proc, "forall j :: 1 <= j && j <= i ==> A[j] <= Result")
    vc = loop_condition(prog, proc, INITIATION, "max[2]", {"max[2]": inv})
    assert vc.label == "initiation@max[2]"
    assert expr_str(vc.formula) == "n >= 1 ==> (forall j: int :: 1 <= j && j <= 0 ==> A[j] <= A[1])"


def test_max_consecution_havocs_targets():
    prog = load("max_v1.ivl")
    proc = prog.procedure("max")
    inv = formula(prog, proc, "forall j :: 1 <= j && j <= i ==> A[j] <= Result")
    vc = loop_condition(prog, proc, CONSECUTION, "max[2]", {"max[2]": inv})
    names = free_vars(vc.formula)
    assert {"i@2", "Result@1"} <= names
    assert "i" not in names and "Result" not in names


def test_true_candidate_gives_tautologies():
    prog = load("partition.ivl")
    proc = prog.procedure("partition")
    from invforge.analysis import all_loops
    ids = [lp.id for lp in all_loops(proc, prog)]
    vcs = procedure_conditions(prog, proc, {lid: TRUE for lid in ids})
    assert len(vcs) == 2 * len(ids)
    assert all(vc.formula == TRUE for vc in vcs)


def test_flip_conditions():
    prog = load("flip.ivl")
    proc = prog.procedure("flip")
    inv = formula(prog, proc, "x >= -1")
    init, step = procedure_conditions(prog, proc, {"flip[1]": inv})
    assert expr_str(init.formula) == "1 >= -1"
    assert expr_str(step.formula) == "x@1 >= -1 ==> -x@1 >= -1"


def test_one_obligation_per_condition():
    prog = parse_program("""procedure p(n: int) returns (r: int) {
      r := 0; assert r == 0;
      while (r < n) { r := r + 1; }
    }""")
    proc = prog.procedure("p")
    inv = formula(prog, proc, "r >= 0")
    vc = loop_condition(prog, proc, INITIATION, "p[2]", {"p[2]": inv})
    # the source assertion becomes a premise
    assert expr_str(vc.formula) == "0 == 0 ==> 0 >= 0"


def test_call_assumes_callee_contract():
    prog = parse_program("""var G: array int;
    procedure inc(k: int) returns (z: int) requires k >= 0; ensures z == k + 1; modifies G;
    procedure p() returns (r: int) modifies G; {
      call r := inc(r);
      while (r > 0) { r := r - 1; }
    }""")
    proc = prog.procedure("p")
    inv = formula(prog, proc, "r >= 0")
    vc = loop_condition(prog, proc, INITIATION, "p[1]", {"p[1]": inv})
    assert expr_str(vc.formula) == "r >= 0 ==> r@3 == r + 1 ==> r@3 >= 0"


def test_sibling_loop_contributes_negated_guard():
    prog = parse_program("""procedure p(n: int) returns (r: int) {
      while (r < n) { r := r + 1; }
      while (r > 0) { r := r - 1; }
    }""")
    proc = prog.procedure("p")
    inv = formula(prog, proc, "r >= n")
    vc = loop_condition(prog, proc, INITIATION, "p[1]", {"p[0]": inv, "p[1]": inv})
    text = expr_str(vc.formula)
    assert "!(r@" in text and "< n)" in text


def test_missing_instance_rejected():
    prog = load("flip.ivl")
    with pytest.raises(KeyError):
        loop_condition(prog, prog.procedure("flip"), INITIATION, "flip[1]", {})


def test_simplifying_constructors():
    p = parse_expr("p")
    assert mk_not(mk_not(p)) == p
    assert mk_and(TRUE, p) == p
    assert mk_implies(p, TRUE) == TRUE
    assert mk_implies(TRUE, p) == p
