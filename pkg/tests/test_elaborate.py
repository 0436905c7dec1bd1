import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from model.ast import App, Assert, Const, Fun, Ident, Lam, TypeEnv, TRUE
from model.elaborate import (
    abstract_binder, check_target, consistent_subtype, erase_trivial_asserts, subtype,
)
from model.errors import RejectedCast, ShapeMismatch, TargetTypeError
from model.parser import Program, TopBinding
from model.solver import Verdict
from conftest import pred, ty

EMPTY = TypeEnv()


def test_base_subtyping():
    assert subtype(EMPTY, TRUE, ty("{v:int | v = 3}"), ty("{v:int | v > 0}")) is Verdict.VALID
    assert subtype(EMPTY, TRUE, ty("{v:int | v > 0}"), ty("{v:int | v = 3}")) is Verdict.INVALID


def test_path_condition_is_assumed():
    env = EMPTY.extend("n", ty("int"))
    assert subtype(env, pred("n > 2"), ty("{v:int | v = n}"), ty("{v:int | v > 0}")) is Verdict.VALID


def test_function_subtyping_is_contravariant():
    wide = ty("x:{v:int | v > 0} -> int")
    narrow = ty("x:{v:int | v > 1} -> int")
    assert subtype(EMPTY, TRUE, wide, narrow) is Verdict.VALID
    assert subtype(EMPTY, TRUE, narrow, wide) is Verdict.INVALID


def test_dependent_codomain():
    left = ty("x:tensor -> tensor(x.shape)")
    right = ty("x:{v:tensor | v.shape = [2; 3]} -> tensor([2; 3])")
    assert subtype(EMPTY, TRUE, left, right) is Verdict.VALID


def test_subtyping_needs_the_same_simple_type():
    with pytest.raises(ShapeMismatch):
        subtype(EMPTY, TRUE, ty("int"), ty("x:int -> int"))


def test_proved_cast_is_trivial():
    cast = consistent_subtype(EMPTY, TRUE, ty("{v:tensor | v.shape = [10]}"),
                              ty("{v:tensor | len v.shape = 1}"))
    assert cast.trivial
    assert cast.apply(Ident("y")) == Ident("y")


def test_imprecise_source_gets_an_assertion():
    cast = consistent_subtype(EMPTY, TRUE, ty("tensor"), ty("{v:tensor | len v.shape = 2}"))
    assert not cast.trivial
    checked = cast.apply(Ident("y"))
    assert isinstance(checked, Assert)
    assert checked.pred == pred("len y.shape = 2")
    assert checked.body == Ident("y")


def test_disjoint_cast_is_rejected():
    with pytest.raises(RejectedCast) as info:
        consistent_subtype(EMPTY, TRUE, ty("{v:tensor | v.shape = [20]}"),
                           ty("{v:tensor | v.shape = [10]}"))
    assert info.value.witness
    assert "incompatible" in info.value.message


def test_function_cast_checks_the_codomain():
    source = ty("x:tensor -> tensor")
    target = ty("x:{v:tensor | len v.shape = 1} -> {v:tensor | len v.shape = 1}")
    cast = consistent_subtype(EMPTY, TRUE, source, target)
    assert cast.dom.trivial
    assert not cast.cod.trivial
    assert len(cast.preds) == 1
    wrapper = cast.apply(Ident("f"))
    assert isinstance(wrapper, Lam)
    assert wrapper.ann == target.dom


def test_abstract_binder():
    body = ty("{v:int | v = n + 1}")
    assert abstract_binder("n", ty("int"), Const(2), body) == ty("{v:int | v = 2 + 1}")
    single = abstract_binder("n", ty("{v:int | v = 4}"), Ident("tmp"), body)
    assert single == ty("{v:int | v = tmp + 1}")
    both = ty("{v:int | v > 0 && v = n + 1}")
    call = App(Ident("g"), Const(0))
    assert abstract_binder("n", ty("int"), call, both) == ty("{v:int | v > 0}")


def test_provable_assertions_are_erased():
    assert erase_trivial_asserts(Assert(pred("1 < 2"), Const(3))) == Const(3)
    env = EMPTY.extend("x", ty("{v:int | v > 1}"))
    assert erase_trivial_asserts(Assert(pred("x > 0"), Ident("x")), env) == Ident("x")
    kept = Assert(pred("x > 0"), Ident("x"))
    assert erase_trivial_asserts(kept, EMPTY.extend("x", ty("int"))) == kept


def test_target_rejects_unannotated_binders():
    program = Program([TopBinding("f", Lam("x", None, Ident("x")))])
    with pytest.raises(TargetTypeError) as info:
        check_target(program)
    assert info.value.rule == "CT-Abs"


def test_target_checks_annotated_functions():
    program = Program([TopBinding("f", Lam("x", ty("{v:int | v > 0}"), Ident("x")))])
    types = check_target(program, {"f": ty("x:{v:int | v > 1} -> {v:int | v > 0}")})
    assert types["f"] == ty("x:{v:int | v > 1} -> {v:int | v > 0}")


REFINEMENTS = [
    "true",
    "len v.shape = 1",
    "len v.shape = 2",
    "len v.shape >= 1",
    "v.shape = [2]",
    "v.shape = [2; 3]",
    "nth 0 v.shape = 2",
    "len v.shape = 2 && nth 1 v.shape = 3",
]

tensor_types = st.sampled_from(REFINEMENTS).map(lambda p: ty(f"{{v:tensor | {p}}}"))
arrow_types = st.tuples(tensor_types, tensor_types).map(lambda ts: Fun("x", *ts))


@settings(deadline=None)
@given(st.one_of(st.tuples(tensor_types, tensor_types), st.tuples(arrow_types, arrow_types)))
def test_valid_subtyping_needs_no_check(pair):
    source, target = pair
    if subtype(EMPTY, TRUE, source, target) is Verdict.VALID:
        assert consistent_subtype(EMPTY, TRUE, source, target).trivial
