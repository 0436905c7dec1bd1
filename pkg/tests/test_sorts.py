import pytest

from model.ast import BaseType
from model.errors import WfError
from model.parser import parse_pred, parse_type
from model.sorts import Sort, infer_sorts, is_wf_type, sort_of, wf_pred, wf_type

ENV = {"n": BaseType.INT, "s": BaseType.INT_LIST, "x": BaseType.TENSOR, "b": BaseType.BOOL}


@pytest.mark.parametrize("text, sort", [
    ("n + 1", Sort.INT),
    ("len x.shape", Sort.INT),
    ("nth 0 s", Sort.INT),
    ("s @ [n; 2]", Sort.SHAPE),
    ("insertAt(0, n, x.shape)", Sort.SHAPE),
    ("broadcastable(s, x.shape)", Sort.BOOL),
    ("b && n < 3", Sort.BOOL),
])
def test_sort_of(text, sort):
    assert sort_of(parse_pred(text), ENV) is sort


@pytest.mark.parametrize("text", [
    "x = [1]",
    "len n = 1",
    "n.shape = [1]",
    "m > 0",
    "s = 1",
])
def test_ill_formed(text):
    with pytest.raises(WfError):
        wf_pred(parse_pred(text), ENV)


def test_partial_functions_are_only_sort_checked():
    wf_pred(parse_pred("head [] = n / 0"), ENV)


def test_dependent_function_scope():
    ty = parse_type("x:tensor -> y:{v:tensor | len v.shape = len x.shape} -> tensor(y.shape)")
    wf_type(ty, {})
    assert not is_wf_type(parse_type("x:tensor -> tensor(y.shape)"), {})


def test_function_binder_not_in_scope():
    ty = parse_type("f:(x:int -> int) -> {v:int | v = f}")
    assert not is_wf_type(ty, {})


def test_infer_sorts_from_use():
    sorts = infer_sorts([parse_pred("len a = k && b.shape = a")])
    assert sorts == {"a": BaseType.INT_LIST, "k": BaseType.INT, "b": BaseType.TENSOR}
