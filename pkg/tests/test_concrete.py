import pytest
from hypothesis import given, settings, strategies as st

import strategies
from conftest import MODELS, load
from invforge.concrete import (
    MAX_ARRAY_LEN, VALUE_RANGE, ArrayValue, Interpreter, Stop, cross_check,
    euclid_div, initial_states,
)
from invforge.parser import parse_expr, parse_program
from invforge.syntax import Program


def test_euclidean_division():
    assert [euclid_div(7, 2), euclid_div(-7, 2), euclid_div(7, -2), euclid_div(-7, -2)] == [3, -4, -3, 4]
    for a in range(-9, 10):
        for b in (-3, -2, -1, 1, 2, 3):
            r = a - b * euclid_div(a, b)
            assert 0 <= r < abs(b)
    with pytest.raises(Stop):
        euclid_div(1, 0)


def test_arrays_are_total_maps():
    a = ArrayValue((3, 5))
    assert [a.get(k) for k in (-1, 1, 2, 9)] == [3, 3, 5, 5]
    assert ArrayValue(()).get(4) == 0
    b = a.set(7, 1)
    assert b.get(7) == 1 and a.get(7) == 5
    assert a.set(1, 3) == a  # equality is extensional


def test_quantifiers_over_window():
    prog = parse_program("")
    it = Interpreter(prog)
    env = {"A": ArrayValue((1, 2, 3)), "n": 3}
    assert it.eval(parse_expr("forall j :: 1 <= j && j < n ==> A[j] <= A[j + 1]"), env)
    assert not it.eval(parse_expr("exists j :: 1 <= j && j <= n && A[j] == 7"), env)
    assert it.eval(parse_expr("exists j, k :: j < k && A[j] == 1 && A[k] == 3"), env)


def test_initial_states_exhaustive_for_small_domains():
    prog = load("flip.ivl")
    states = list(initial_states(prog.procedure("flip"), prog))
    assert len(states) == 1  # no inputs; the output starts arbitrary
    prog = load("max_v1.ivl")
    states = list(initial_states(prog.procedure("max"), prog, limit=10**6))
    arrays = sum(len(VALUE_RANGE) ** k for k in range(MAX_ARRAY_LEN + 1))
    assert len(states) == arrays * len(VALUE_RANGE)


def test_initial_states_sampled_for_large_domains():
    prog = load("max_v1.ivl")
    states = list(initial_states(prog.procedure("max"), prog, limit=50))
    assert len(states) == 50
    assert states == list(initial_states(prog.procedure("max"), prog, limit=50))


def test_cross_check_finds_wrong_invariant():
    prog = load("max_v1.ivl")
    proc = prog.procedure("max")
    bad = {"max[2]": [parse_expr("forall j :: 1 <= j && j <= n ==> A[j] <= Result")]}
    result = cross_check(prog, proc, bad, limit=10**6)
    assert result.violations and result.runs > 0
    assert "fails at max[2]" in str(result.violations[0])


def test_cross_check_accepts_true_invariant():
    prog = load("max_v1.ivl")
    good = {"max[2]": [parse_expr("forall j :: 1 <= j && j <= i ==> A[j] <= Result")]}
    result = cross_check(prog, prog.procedure("max"), good, limit=10**6)
    assert result.violations == [] and result.loop_visits > result.runs


def test_cross_check_uses_models():
    prog = load("sum_array.ivl")
    proc = prog.procedure(prog.procedures[-1].name)
    result = cross_check(prog, proc, {}, models=MODELS, limit=2000)
    assert result.runs > 0


def test_unknown_loop_id():
    prog = load("max_v1.ivl")
    with pytest.raises(KeyError):
        cross_check(prog, prog.procedure("max"), {"max[9]": []})


@pytest.mark.parametrize("text", [
    "forall j :: a <= j && j < r ==> M[j] >= 0",
    "forall j, k :: 1 <= j && j <= k && k <= r ==> M[j] <= M[k]",
    "exists j :: j == a + 1 && M[j] == r",
    "forall j :: r - 20 < j ==> j > a - 30",
])
def test_narrowing_agrees_on_bounded_guards(text):
    e = parse_expr(text)
    for a in range(-3, 4):
        for r in range(-3, 4):
            env = {"a": a, "r": r, "M": ArrayValue((a, -1, r))}
            assert Interpreter(Program()).eval(e, env) == \
                Interpreter(Program(), narrow=False).eval(e, env)


ENV_VALUES = st.fixed_dictionaries({
    **{n: st.integers(-4, 4) for n in ("a", "r", "x", "y")},
    **{n: st.booleans() for n in ("p", "q")},
    **{n: st.lists(st.integers(-4, 4), max_size=4).map(lambda c: ArrayValue(tuple(c)))
       for n in ("M", "N", "G")},
})


@settings(max_examples=300, deadline=None)
@given(strategies.bool_exprs(), ENV_VALUES)
def test_guard_narrowing_preserves_meaning(e, env):
    prog = Program(functions=strategies.HEADER_FUNCTIONS)
    models = {"f": lambda u, v: u - 2 * v}
    try:
        plain = Interpreter(prog, models, narrow=False).eval(e, env)
    except Stop:
        return
    assert Interpreter(prog, models, narrow=True).eval(e, env) == plain
