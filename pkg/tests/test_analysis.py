import json

import pytest

from conftest import corpus_files, load
from invforge.analysis import (
    ID, MAP, NUMBER, OccurrenceRangeError, all_loops, analysis_report,
    count_occurrences, outer_loops, replace_all, replace_nth, subexpressions,
    targets, variables,
)
from invforge.errors import AnalysisError, SubstitutionError
from invforge.parser import parse_expr, parse_program
from invforge.printer import expr_str
from invforge.resolve import check_expr
from invforge.syntax import BoolLit, Call, IntLit, Program, ProcedureDecl, Type, Var, While

IS_MAX_BODY = "forall j :: low <= j && j <= high ==> A[j] <= m"


def typed(text, **types):
    env = {k: Type[v.upper()] for k, v in types.items()}
    return check_expr(parse_expr(text), env, {})


def test_targets_of_max():
    prog = load("max_v1.ivl")
    (loop,) = all_loops(prog.procedure("max"), prog)
    assert loop.targets == {"i", "Result"}


def test_targets_of_empty_loop():
    prog = parse_program("procedure p(n: int) { while (n > 0) { } }")
    (loop,) = all_loops(prog.procedure("p"), prog)
    assert loop.targets == frozenset()


def test_targets_of_partition_outer_loop_include_callee_modifies():
    prog = load("partition.ivl")
    outer = outer_loops(prog.procedure("partition"), prog)
    assert [lp.targets for lp in outer] == [{"low_index", "high_index", "A"}]


def test_targets_accepts_a_while_statement():
    prog = load("max_v1.ivl")
    loop = next(s for s in prog.procedure("max").body if isinstance(s, While))
    assert targets(loop, prog) == {"i", "Result"}


def test_unresolved_callee_is_an_analysis_error():
    proc = ProcedureDecl("p", body=(While(BoolLit(True), (), (Call((), "missing", ()),)),))
    with pytest.raises(AnalysisError, match="missing"):
        all_loops(proc, Program(procedures=(proc,)))


def test_partition_loops():
    prog = load("partition.ivl")
    proc = prog.procedure("partition")
    loops = all_loops(proc, prog)
    assert len(loops) == 3
    assert len(outer_loops(proc, prog)) == 1
    assert [lp.parent for lp in loops] == [None, loops[0].id, loops[0].id]


def test_loop_free_procedure():
    prog = parse_program("procedure p() returns (r: int) { r := 1; }")
    proc = prog.procedure("p")
    assert all_loops(proc, prog) == [] and outer_loops(proc, prog) == []


def test_max_v2_single_outer_loop():
    prog = load("max_v2.ivl")
    proc = prog.procedure("max_v2")
    assert all_loops(proc, prog) == outer_loops(proc, prog)
    assert len(outer_loops(proc, prog)) == 1


def test_triple_nesting_parent_chain():
    prog = load("triple_nested.ivl")
    loops = all_loops(prog.procedure("triple"), prog)
    by_id = {lp.id: lp for lp in loops}
    assert len(loops) == 3
    chain = []
    node = loops[-1]
    while node.parent is not None:
        chain.append(node.parent)
        node = by_id[node.parent]
    assert len(chain) == 2
    assert [lp.depth for lp in loops] == [0, 1, 2]


def test_loop_ids_follow_branches():
    prog = parse_program("""procedure p(n: int) returns (r: int) {
      if (n > 0) { while (r < n) { r := r + 1; } } else { while (r > n) { r := r - 1; } }
    }""")
    ids = [lp.id for lp in all_loops(prog.procedure("p"), prog)]
    assert ids == ["p[0].then[0]", "p[0].else[0]"]


@pytest.mark.parametrize("name", corpus_files())
def test_nested_targets_are_monotone(name):
    prog = load(name)
    for proc in prog.procedures:
        loops = {lp.id: lp for lp in all_loops(proc, prog)}
        for lp in loops.values():
            if lp.parent is not None:
                assert lp.targets <= loops[lp.parent].targets


def test_variables_are_the_visible_scope():
    prog = load("partition.ivl")
    assert variables(prog.procedure("partition"), prog) == {
        "A", "n", "pivot", "Result", "low_index", "high_index"}


def test_map_occurrences_of_is_max_body():
    f = parse_expr("forall j :: low <= j && j <= high ==> X[j] <= v")
    occ = subexpressions(f, MAP)
    assert [expr_str(o.subexpression) for o in occ] == ["X[j]"]


def test_no_numbers_in_true():
    assert subexpressions(parse_expr("true"), NUMBER) == []


def test_id_occurrences_in_preorder():
    f = parse_expr("1 <= j && j <= n ==> A[j] <= v")
    occ = subexpressions(f, ID)
    assert [o.subexpression.name for o in occ] == ["j", "j", "n", "A", "j", "v"]
    assert [o.position for o in occ] == [1, 2, 3, 4, 5, 6]
    assert [o.nth for o in occ if o.subexpression.name == "j"] == [1, 2, 3]


def test_binders_are_bound_id_occurrences():
    occ = subexpressions(parse_expr(IS_MAX_BODY), ID)
    names = [(o.subexpression.name, o.bound) for o in occ]
    assert names[0] == ("j", True)
    assert ("low", False) in names and ("j", True) in names[1:]


def test_unknown_class_rejected():
    with pytest.raises(ValueError):
        subexpressions(parse_expr("x"), "Float")


def test_replace_all_renames_binder_and_body():
    f = parse_expr(IS_MAX_BODY)
    out = replace_all(f, Var("j"), Var("h"))
    assert expr_str(out) == "forall h: int :: low <= h && h <= high ==> A[h] <= m"


def test_replace_fourth_occurrence():
    f = parse_expr(IS_MAX_BODY)
    out = replace_nth(f, Var("j"), Var("h"), 4)
    assert expr_str(out) == "forall j: int :: low <= j && j <= high ==> A[h] <= m"


def test_replace_all_identity_and_both_occurrences():
    f = parse_expr("n + n")
    assert replace_all(f, Var("x"), Var("x")) == f
    assert replace_all(f, Var("n"), Var("n")) == f
    assert expr_str(replace_all(f, Var("n"), Var("i"))) == "i + i"


def test_replace_nth_single_occurrence_equals_replace_all():
    f = parse_expr("x + 1 < y")
    assert replace_nth(f, Var("x"), Var("z"), 1) == replace_all(f, Var("x"), Var("z"))


def test_replace_nth_out_of_range():
    f = parse_expr("x + x")
    with pytest.raises(OccurrenceRangeError):
        replace_nth(f, Var("x"), Var("y"), 3)
    with pytest.raises(IndexError):
        replace_nth(f, Var("x"), Var("y"), 0)


def test_replace_type_mismatch():
    f = typed("A[i] <= n", A="map", i="int", n="int")
    with pytest.raises(SubstitutionError):
        replace_all(f, Var("n", ty=Type.INT), Var("A", ty=Type.MAP))


def test_binder_cannot_become_a_compound_expression():
    f = parse_expr(IS_MAX_BODY)
    with pytest.raises(SubstitutionError):
        replace_nth(f, Var("j"), parse_expr("i - 1"), 1)


def test_replace_map_selection_and_number():
    f = parse_expr("A[n] + 1 == 1")
    assert expr_str(replace_all(f, parse_expr("A[n]"), Var("r"))) == "r + 1 == 1"
    assert expr_str(replace_nth(f, IntLit(1), Var("k"), 2)) == "A[n] + 1 == k"
    assert count_occurrences(f, IntLit(1)) == 2


def test_analysis_report_is_json():
    prog = load("partition.ivl")
    report = analysis_report(prog, prog.procedure("partition"))
    text = json.dumps(report)
    back = json.loads(text)
    assert [lp["id"] for lp in back["loops"]] == [lp.id for lp in all_loops(prog.procedure("partition"), prog)]
    assert set(back["loops"][0]["targets"]) == {"A", "high_index", "low_index"}
    assert back["ensures"][0]["occurrences"]["Map"]
