"""Sorts and well-formedness of refinements.

A refinement is well formed when every subexpression has the sort its
operator expects and every variable it mentions is in scope.
"""
from enum import Enum

from model.ast import (
    Add, And, Append, Base, BaseType, BoolConst, Broadcast, Broadcastable, Cons,
    Div, DropAt, Eq, Fun, Head, Init, InsertAt, Last, Le, Len, Lt, Matmul, Mul,
    Neg, Not, Nth, Num, Or, PredApp, Prod, Reshape, Reshapeable, ShapeList,
    ShapeOf, Swap, Tail, Var,
)
from model.errors import WfError


class Sort(Enum):
    INT = "int"
    SHAPE = "shape"
    BOOL = "bool"
    TENSOR = "tensor"


SORT_OF_BASE = {
    BaseType.INT: Sort.INT,
    BaseType.INT_LIST: Sort.SHAPE,
    BaseType.BOOL: Sort.BOOL,
    BaseType.TENSOR: Sort.TENSOR,
}

BASE_OF_SORT = {v: k for k, v in SORT_OF_BASE.items()}

# operator -> (argument sorts, result sort)
_SIGNATURES = {
    Neg: ((Sort.INT,), Sort.INT),
    Add: ((Sort.INT, Sort.INT), Sort.INT),
    Mul: ((Sort.INT, Sort.INT), Sort.INT),
    Div: ((Sort.INT, Sort.INT), Sort.INT),
    Head: ((Sort.SHAPE,), Sort.INT),
    Last: ((Sort.SHAPE,), Sort.INT),
    Len: ((Sort.SHAPE,), Sort.INT),
    Prod: ((Sort.SHAPE,), Sort.INT),
    Nth: ((Sort.INT, Sort.SHAPE), Sort.INT),
    Cons: ((Sort.INT, Sort.SHAPE), Sort.SHAPE),
    Append: ((Sort.SHAPE, Sort.SHAPE), Sort.SHAPE),
    Tail: ((Sort.SHAPE,), Sort.SHAPE),
    Init: ((Sort.SHAPE,), Sort.SHAPE),
    InsertAt: ((Sort.INT, Sort.INT, Sort.SHAPE), Sort.SHAPE),
    DropAt: ((Sort.INT, Sort.SHAPE), Sort.SHAPE),
    Swap: ((Sort.INT, Sort.INT, Sort.SHAPE), Sort.SHAPE),
    Reshape: ((Sort.SHAPE, Sort.SHAPE), Sort.SHAPE),
    Broadcast: ((Sort.SHAPE, Sort.SHAPE), Sort.SHAPE),
    Matmul: ((Sort.SHAPE, Sort.SHAPE), Sort.SHAPE),
    Le: ((Sort.INT, Sort.INT), Sort.BOOL),
    Lt: ((Sort.INT, Sort.INT), Sort.BOOL),
    Not: ((Sort.BOOL,), Sort.BOOL),
    And: ((Sort.BOOL, Sort.BOOL), Sort.BOOL),
    Or: ((Sort.BOOL, Sort.BOOL), Sort.BOOL),
    Broadcastable: ((Sort.SHAPE, Sort.SHAPE), Sort.BOOL),
    Reshapeable: ((Sort.SHAPE, Sort.SHAPE), Sort.BOOL),
}


def _operands(e):
    return [getattr(e, name) for name in e.__dataclass_fields__]


def sort_of(e, env):
    # type: (Expr, Mapping[str, BaseType]) -> Sort
    """
    The sort of `e` under `env` (variable name to base type).

    Raises `WfError` on an unbound variable, an operand of the wrong
    sort, or a tensor variable used outside `ShapeOf`.
    """
    if isinstance(e, Var):
        base = env.get(e.name)
        if base is None:
            raise WfError(f"unbound variable {e.name} in refinement", subterm=e)
        if base is BaseType.TENSOR:
            raise WfError(f"tensor {e.name} used as a value; write {e.name}.shape",
                          subterm=e, sort=Sort.TENSOR)
        return SORT_OF_BASE[base]
    if isinstance(e, Num):
        return Sort.INT
    if isinstance(e, BoolConst):
        return Sort.BOOL
    if isinstance(e, ShapeOf):
        if not isinstance(e.arg, Var) or env.get(e.arg.name) is not BaseType.TENSOR:
            raise WfError(f"shape of a non-tensor {e.arg}", subterm=e, sort=Sort.TENSOR)
        return Sort.SHAPE
    if isinstance(e, ShapeList):
        for item in e.items:
            _expect(item, Sort.INT, env)
        return Sort.SHAPE
    if isinstance(e, Eq):
        left = sort_of(e.left, env)
        _expect(e.right, left, env)
        return Sort.BOOL
    if isinstance(e, PredApp):
        if len(e.args) != len(e.var.inputs):
            raise WfError(f"{e.var.name} expects {len(e.var.inputs)} arguments", subterm=e)
        for arg, (_, base) in zip(e.args, e.var.inputs):
            if base is BaseType.TENSOR:
                if isinstance(arg, Var) and env.get(arg.name) is BaseType.TENSOR:
                    continue
                _expect(arg, Sort.SHAPE, env)
            else:
                _expect(arg, SORT_OF_BASE[base], env)
        return Sort.BOOL
    signature = _SIGNATURES.get(type(e))
    if signature is None:
        raise WfError(f"unknown refinement form {e!r}", subterm=e)
    args, result = signature
    for operand, sort in zip(_operands(e), args):
        _expect(operand, sort, env)
    return result


def _expect(e, sort, env):
    found = sort_of(e, env)
    if found is not sort:
        raise WfError(f"expected {sort.value}, found {found.value}", subterm=e, sort=found)


def wf_pred(p, env):
    """Raise `WfError` unless `p` is a well-sorted boolean under `env`."""
    _expect(p, Sort.BOOL, env)


def wf_type(t, env):
    # type: (RType, dict) -> None
    """Raise `WfError` unless every refinement in `t` is well formed."""
    if isinstance(t, Base):
        inner = dict(env)
        inner[t.var] = t.base
        wf_pred(t.pred, inner)
        return
    wf_type(t.dom, env)
    inner = dict(env)
    if isinstance(t.dom, Base):
        inner[t.var] = t.dom.base
    else:
        inner.pop(t.var, None)
    wf_type(t.cod, inner)


def is_wf_type(t, env):
    try:
        wf_type(t, env)
    except WfError:
        return False
    return True


def infer_sorts(exprs, known=None):
    # type: (Iterable[Expr], Mapping[str, BaseType] | None) -> dict[str, BaseType]
    """
    Base types of the variables of `exprs`, as far as their use
    determines them. Entries of `known` win.
    """
    out = dict(known or {})

    def visit(e, want):
        if isinstance(e, Var):
            if e.name not in out and want is not None:
                out[e.name] = BASE_OF_SORT[want]
            return
        if isinstance(e, ShapeOf):
            if isinstance(e.arg, Var):
                out.setdefault(e.arg.name, BaseType.TENSOR)
            return
        if isinstance(e, (Num, BoolConst)):
            return
        if isinstance(e, ShapeList):
            for item in e.items:
                visit(item, Sort.INT)
            return
        if isinstance(e, Eq):
            side = _guess(e.left, out) or _guess(e.right, out)
            visit(e.left, side)
            visit(e.right, side)
            return
        if isinstance(e, PredApp):
            for arg, (_, base) in zip(e.args, e.var.inputs):
                visit(arg, SORT_OF_BASE[base])
            return
        signature = _SIGNATURES.get(type(e))
        if signature:
            for operand, sort in zip(_operands(e), signature[0]):
                visit(operand, sort)

    for e in exprs:
        visit(e, Sort.BOOL)
    return out


def _guess(e, env):
    if isinstance(e, Var):
        base = env.get(e.name)
        return SORT_OF_BASE[base] if base is not None else None
    if isinstance(e, Num):
        return Sort.INT
    if isinstance(e, (BoolConst, Eq, Not, And, Or, Le, Lt, PredApp, Broadcastable, Reshapeable)):
        return Sort.BOOL
    if isinstance(e, (ShapeList, ShapeOf)):
        return Sort.SHAPE
    signature = _SIGNATURES.get(type(e))
    return signature[1] if signature else None


def expr_sort(e, env):
    """Best-effort sort of `e`, or None when its variables are unknown."""
    return _guess(e, env)
