import pytest

from model.ast import Fix, Lam
from model.errors import UnboundVariable, UnificationError
from model.parser import parse_type
from model.simpletypes import (
    BOOL, INT, INT_LIST, TENSOR, SimpleInference, TArrow, TVar, erase, is_ground,
)
from conftest import simple


def types_of(program):
    return {b.name: b.term.stype for b in program.bindings}


def test_erase():
    t = parse_type("x:{v:tensor | len v.shape = 2} -> tensor([nth 1 x.shape; nth 0 x.shape])")
    assert erase(t) == TArrow(TENSOR, TENSOR)
    assert str(TArrow(TArrow(INT, BOOL), INT_LIST)) == "(int -> bool) -> int list"


def test_arithmetic(stubs):
    types = types_of(simple("let f x = x + 1\n;;\nlet b = f 2 < 3", stubs))
    assert types == {"f": TArrow(INT, INT), "b": BOOL}


def test_stub_application(stubs):
    types = types_of(simple("let y = Tensor.tr (Tensor.zeros [2; 3])\n;;\n"
                            "let s = Tensor.shape y", stubs))
    assert types == {"y": TENSOR, "s": INT_LIST}


def test_every_node_is_ground(stubs):
    program = simple("let model s =\n  let f = Tensor.avg_pool1d s in\n"
                     "  fun x -> let y = f x in Tensor.relu y", stubs)
    lam = program.bindings[0].term
    assert isinstance(lam, Lam)
    assert lam.stype == TArrow(INT, TArrow(TENSOR, TENSOR))
    assert is_ground(lam.body.stype)


def test_unconstrained_variables_default_to_int(stubs):
    program = simple("let id x = x", stubs)
    assert program.bindings[0].term.stype == TArrow(INT, INT)


def test_clash(stubs):
    with pytest.raises(UnificationError):
        simple("let f x = Tensor.tr x + 1", stubs)


def test_branches_must_agree(stubs):
    with pytest.raises(UnificationError):
        simple("let f b = if b then 1 else [1; 2]", stubs)


def test_unbound(stubs):
    with pytest.raises(UnboundVariable):
        simple("let f x = Tensor.frobnicate x", stubs)


def test_occurs_check():
    inference = SimpleInference({})
    a = inference.fresh()
    with pytest.raises(UnificationError):
        inference.unify(a, TArrow(a, INT))
    b = inference.fresh()
    inference.unify(b, TArrow(INT, BOOL))
    assert inference.zonk(TArrow(b, TVar(99))) == TArrow(TArrow(INT, BOOL), TVar(99))


def test_recursive_binding_is_ground(stubs):
    program = simple("let rec count (i : int) : int = if i = 0 then 0 else count (i - 1)", stubs)
    fix = program.bindings[0].term
    assert isinstance(fix, Fix) and isinstance(fix.fn, str)
    assert fix.stype == TArrow(INT, INT)
    assert is_ground(fix.body.stype)
