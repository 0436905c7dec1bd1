import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from model.ast import BaseType, PredApp, PredVar, TRUE, Var, conj
from model.logic import holds
from model.errors import EncodingError, WfError
from model.solver import Verdict, check_sat, check_validity, configure, options
from model.sorts import Sort, expr_sort, is_wf_type, wf_pred
from model.tools.smtlib import emit_smtlib2
from conftest import pred, ty

INT = BaseType.INT
TENSOR = BaseType.TENSOR


def test_valid_implication():
    answer = check_validity((("x", INT),), pred("x = 3"), pred("x > 0"))
    assert answer.verdict is Verdict.VALID


def test_invalid_with_witness():
    answer = check_validity((("x", TENSOR),), TRUE, pred("len x.shape = 1"))
    assert answer.verdict is Verdict.INVALID
    assert len(answer.witness["x"]) != 1


def test_shape_reasoning():
    prefix = (("s", INT), ("x", TENSOR))
    hyp = pred("len x.shape = 1 && nth 0 x.shape / s = 10")
    assert check_validity(prefix, hyp, pred("len x.shape >= 1")).valid
    assert check_validity(prefix, pred("x.shape = [20] && s = 2"),
                          pred("nth 0 x.shape / s = 10")).valid


def test_unsat_and_sat():
    prefix = (("x", TENSOR),)
    assert check_sat(prefix, pred("x.shape = [20] && x.shape = [10]")).unsat
    answer = check_sat(prefix, pred("len x.shape = 2"))
    assert answer.verdict is Verdict.SAT
    assert len(answer.witness["x"]) == 2


def test_predicate_variables_are_refused():
    pv = PredVar(0, (("v", INT),), 0, 0)
    with pytest.raises(WfError):
        check_validity((("v", INT),), PredApp(pv, (Var("v"),)), TRUE)


def test_configure_rejects_unknown_options():
    with pytest.raises(AttributeError):
        configure(no_such_option=1)
    assert options.search_limit > 0


def test_sorts():
    env = {"x": TENSOR, "s": INT}
    assert expr_sort(pred("nth 0 x.shape / s"), env) is Sort.INT
    wf_pred(pred("len x.shape = s"), env)
    with pytest.raises(WfError):
        wf_pred(pred("len s = 1"), env)
    assert is_wf_type(ty("x:tensor -> {v:int | v = len x.shape}"), {})
    assert not is_wf_type(ty("{v:int | v = len y.shape}"), {})


def test_smtlib_script():
    script = emit_smtlib2((("x", TENSOR),), pred("len x.shape = 2"), pred("len x.shape >= 1"), 2)
    assert script.startswith("(set-logic ALL)")
    assert "(declare-const |x.len| Int)" in script
    assert "(declare-const |x.2| Int)" not in script
    assert script.rstrip().endswith("(exit)")
    assert "(check-sat)" in script


def test_smtlib_rejects_unencodable():
    with pytest.raises(EncodingError):
        emit_smtlib2((("x", TENSOR), ("s", BaseType.INT_LIST)), TRUE, pred("reshapeable(x.shape, s)"))


def test_partial_terms_defined_by_the_hypothesis():
    prefix = (("s", INT), ("x", TENSOR), ("v", TENSOR))
    hyp = pred("len x.shape = 1 && v.shape = [nth 0 x.shape / s]")
    assert check_validity(prefix, hyp, pred("v.shape = [nth 0 x.shape / s]")).valid
    assert check_validity(prefix, hyp, pred("nth 0 x.shape / s = nth 0 x.shape / s")).valid
    answer = check_validity((("s", INT), ("x", TENSOR)), TRUE,
                            pred("nth 0 x.shape / s = nth 0 x.shape / s"))
    assert not answer.valid


HYPOTHESES = [
    "true",
    "len x.shape = 1",
    "x.shape = [i; j]",
    "len x.shape = 1 && nth 0 x.shape / i = 10",
    "len x.shape = 2 && nth 1 x.shape = i",
    "i > 0 && j = i + 1",
    "x.shape = [nth 0 x.shape / i]",
    "head x.shape = j && i = 2",
]

GOALS = [
    "len x.shape >= 1",
    "nth 0 x.shape = i",
    "i / j = i / j",
    "x.shape = x.shape",
    "head x.shape = j",
    "len x.shape = 2",
    "j > i",
    "nth 1 x.shape = i",
    "nth 0 x.shape / i = 10",
    "i :: x.shape = j :: x.shape",
    "i = j || not (i = j)",
    "broadcastable(x.shape, [i])",
]

small = st.integers(min_value=-3, max_value=3)
shapes = st.lists(st.integers(min_value=0, max_value=4), max_size=3).map(tuple)


@settings(deadline=None)
@given(st.sampled_from(HYPOTHESES), st.sampled_from(GOALS), small, small, shapes)
def test_answers_are_sound(hyp, goal, i, j, shape):
    prefix = (("i", INT), ("j", INT), ("x", TENSOR))
    hyp, goal = pred(hyp), pred(goal)
    answer = check_validity(prefix, hyp, goal)
    env = {"i": i, "j": j, "x": shape}
    if answer.valid and holds(hyp, env):
        assert holds(goal, env)
    if answer.verdict is Verdict.INVALID:
        assert holds(hyp, answer.witness)
        assert not holds(goal, answer.witness)
    sat = check_sat(prefix, conj(hyp, goal))
    if sat.verdict is Verdict.SAT:
        assert holds(conj(hyp, goal), sat.witness)
    if sat.unsat:
        assert not (holds(hyp, env) and holds(goal, env))
