import glob
import os

import pytest

from config import CORPUS_DIR, PRELUDE_FILE
from model.ast import (App, Assert, Base, BaseType, Eq, Fun, Ident, Lam, Len, Let, Lt,
                       Not, Num, ShapeOf, Var, TRUE)
from model.errors import ParseError, WfError
from model.parser import parse_program, parse_stubs, parse_type
from model.printer import print_program, print_type
from conftest import pred

SOURCES = sorted(f for f in glob.glob(os.path.join(CORPUS_DIR, "*.gt"))
                 if not f.endswith("parse_error.gt"))


def test_refinement_type():
    t = parse_type("{v:tensor | len v.shape = 1}")
    assert t == Base("v", BaseType.TENSOR, Eq(Len(ShapeOf(Var("v"))), Num(1)))


def test_tensor_shorthand_and_arrows():
    t = parse_type("x:{v:tensor | len v.shape = 2} -> tensor([nth 1 x.shape; nth 0 x.shape])")
    assert isinstance(t, Fun)
    assert t.var == "x"
    assert print_type(t.cod) == "tensor([nth 1 x.shape; nth 0 x.shape])"
    assert parse_type("int list") == Base("v", BaseType.INT_LIST, TRUE)


def test_comparisons_are_normalized():
    assert pred("x > 0") == Lt(Num(0), Var("x"))
    assert pred("x <> 0") == Not(Eq(Var("x"), Num(0)))
    assert pred("x != 0") == pred("x <> 0")


def test_operators_desugar_to_applications():
    program = parse_program("let f x = x + 1")
    lam = program.bindings[0].term
    assert isinstance(lam, Lam)
    body = lam.body
    while isinstance(body, Let):
        body = body.body
    assert isinstance(body, App)


def test_main_expression_and_stubs():
    program = parse_program("val g : tensor([10]) -> tensor([1])\nlet _ = g (Tensor.zeros [10])")
    assert program.stubs[0].name == "g"
    main = program.bindings[-1]
    assert main.is_main
    assert main.name.startswith("main")


def test_assert_and_annotation():
    program = parse_program("let f x = assert (len x.shape = 1); (x : tensor)")
    body = program.bindings[0].term.body
    assert isinstance(body, Assert)


def test_program_is_in_anf():
    program = parse_program("let _ = Tensor.tr (Tensor.zeros [2; 3])")
    term = program.bindings[0].term
    assert isinstance(term, Let)
    assert isinstance(term.body, App)
    assert isinstance(term.body.arg, Ident)


def test_parse_error_reports_position_and_expected():
    with pytest.raises(ParseError) as info:
        parse_program("let f x =")
    assert info.value.span is not None
    assert info.value.expected


def test_duplicate_top_level_names():
    with pytest.raises(ParseError):
        parse_program("let f = 1\n;;\nlet f = 2")


def test_prelude_is_well_formed():
    with open(PRELUDE_FILE, encoding="UTF-8") as file:
        decls = parse_stubs(file.read())
    names = {d.name for d in decls}
    assert {"Tensor.tr", "Layer.forward", "load", "*"} <= names
    forward = next(d for d in decls if d.name == "Layer.forward")
    assert forward.pred_params == ("b1", "b2")


def test_ill_sorted_stub():
    with pytest.raises(WfError):
        parse_stubs("val bad : x:int -> {v:tensor | len x = 1}")


@pytest.mark.parametrize("path", SOURCES, ids=os.path.basename)
def test_print_parse_round_trip(path):
    with open(path, encoding="UTF-8") as file:
        program = parse_program(file.read())
    text = print_program(program)
    again = parse_program(text)
    assert print_program(again) == text


def test_let_rec_prints_under_its_own_name():
    source = ("let rec count (n : int) : int = if n = 0 then 0 else count (n - 1)\n;;\n"
              "let g m = let rec down k = if k = 0 then m else down (k - 1) in down m")
    text = print_program(parse_program(source))
    assert text.startswith("let rec count :")
    assert "let rec down" in text
    assert print_program(parse_program(text)) == text
