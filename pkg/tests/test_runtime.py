import pytest

from model.ast import App, Assert, Const, Fix, Ident, Lam, Prim, TensorVal
from model.parser import Program, TopBinding
from model.runtime import (
    Blame, OutOfFuel, Stuck, Value, evaluate, parse_value, program_term, show_value,
)
from conftest import pred, ty

PLUS = Prim("+", ty("x:int -> y:int -> {v:int | v = x + y}"))


def call(fn, *args):
    for arg in args:
        fn = App(fn, arg)
    return fn


def test_arithmetic():
    outcome = evaluate(call(PLUS, Const(1), Const(2)))
    assert isinstance(outcome, Value)
    assert outcome.value == Const(3)
    assert outcome.steps == 2
    assert outcome.kind == "value"


def test_builtin_shape_functions():
    tr = Prim("Tensor.tr", ty("x:tensor -> tensor"))
    assert evaluate(App(tr, TensorVal((2, 3)))).value == TensorVal((3, 2))
    pool = Prim("Tensor.avg_pool1d", ty("k:int -> x:tensor -> tensor"))
    assert evaluate(call(pool, Const(2), TensorVal((20,)))).value == TensorVal((10,))


def test_failed_primitive_blames():
    tr = Prim("Tensor.tr", ty("x:tensor -> tensor"))
    outcome = evaluate(App(tr, TensorVal((5,))))
    assert isinstance(outcome, Blame)
    assert "transpose" in outcome.reason


def test_failed_assertion_blames_with_operands():
    outcome = evaluate(Assert(pred("len [3; 4] = 1"), Const(0)))
    assert isinstance(outcome, Blame)
    assert outcome.pred == pred("len [3; 4] = 1")
    assert outcome.operands["len [3; 4]"] == 2
    assert str(outcome).startswith("assertion failed")


def test_passing_assertion_continues():
    assert evaluate(Assert(pred("1 < 2"), Const(7))).value == Const(7)


def test_stub_runs_from_its_signature():
    g = Prim("g", ty("x:{v:tensor | v.shape = [10]} -> tensor([1])"))
    assert evaluate(App(g, TensorVal((10,)))).value == TensorVal((1,))
    assert isinstance(evaluate(App(g, TensorVal((20,)))), Blame)


def test_unknown_result_blames():
    h = Prim("h", ty("x:tensor -> tensor"))
    outcome = evaluate(App(h, TensorVal((2,))))
    assert isinstance(outcome, Blame)
    assert "no computable result" in outcome.reason


def test_free_variable_is_stuck():
    outcome = evaluate(App(Lam("x", None, Ident("x")), Ident("y")))
    assert isinstance(outcome, Stuck)


def test_fuel():
    loop = Fix("f", ty("x:int -> int"), "x", App(Ident("f"), Ident("x")))
    outcome = evaluate(App(loop, Const(0)), fuel=10)
    assert isinstance(outcome, OutOfFuel)
    assert outcome.steps == 10


def test_program_term_applies_the_last_binding():
    program = Program([TopBinding("k", Const(1)),
                       TopBinding("f", Lam("x", ty("int"), call(PLUS, Ident("x"), Ident("k"))))])
    outcome = evaluate(program_term(program, [Const(3)]))
    assert outcome.value == Const(4)


@pytest.mark.parametrize("text, value", [
    ("2", Const(2)),
    ("-1", Const(-1)),
    ("true", Const(True)),
    ("[1; 2]", Const((1, 2))),
    ("[]", Const(())),
    ("tensor[20]", TensorVal((20,))),
    ("tensor[3;2]", TensorVal((3, 2))),
])
def test_parse_value(text, value):
    assert parse_value(text) == value


@pytest.mark.parametrize("text", ["x", "tensor", "tensor[-1]", "[1; a]"])
def test_parse_value_rejects(text):
    with pytest.raises(ValueError):
        parse_value(text)


def test_show_value():
    assert show_value(TensorVal((3, 2))) == "tensor[3; 2]"
    assert show_value(Const(False)) == "false"
    assert show_value(Const((1, 2))) == "[1; 2]"
    assert show_value(Lam("x", None, Ident("x"))) == "<fun>"
