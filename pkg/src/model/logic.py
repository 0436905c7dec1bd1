"""Refinement logic.

Evaluation of sizes, shapes and predicates under an assignment, the
shape operators they are built from, a bottom-up simplifier, and the
linear normal form used by the prover for integer atoms.
"""
from functools import lru_cache

import numpy as np

from model.ast import (
    Add, And, Append, BoolConst, Broadcast, Broadcastable, Cons, Div, DropAt, Eq,
    Head, Init, InsertAt, Last, Le, Len, Lt, Matmul, Mul, Neg, Not, Nth, Num, Or,
    PredApp, Prod, Reshape, Reshapeable, ShapeList, ShapeOf, Swap, Tail, Var,
    FALSE, TRUE, children, conj, conjuncts, disj, disjuncts, free_vars, has_pred_app,
    map_children, shape_lit,
)
from model.errors import EvalError


#******************************************************************************
#                              Shape operators
#******************************************************************************

def int_div(a, b):
    """Integer division truncating toward zero."""
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def shape_prod(s):
    return int(np.prod(np.asarray(s, dtype=np.int64))) if s else 1


def is_broadcastable(s, t):
    # type: (tuple, tuple) -> bool
    """Right-aligned, every pair of dimensions equal or one of them 1."""
    a, b = _aligned(s, t)
    return bool(np.all((a == b) | (a == 1) | (b == 1)))


def broadcast_shape(s, t):
    # type: (tuple, tuple) -> tuple
    if not is_broadcastable(s, t):
        raise EvalError("shapes are not broadcastable", ShapeList((shape_lit(s), shape_lit(t))))
    a, b = _aligned(s, t)
    return tuple(int(d) for d in np.where(a == 1, b, a))


def _aligned(s, t):
    n = max(len(s), len(t))
    a = np.pad(np.asarray(s, dtype=np.int64), (n - len(s), 0), constant_values=1)
    b = np.pad(np.asarray(t, dtype=np.int64), (n - len(t), 0), constant_values=1)
    return a, b


def is_reshapeable(s, t):
    # type: (tuple, tuple) -> bool
    """`t` has the element count of `s`, one of its entries possibly -1."""
    holes = [d for d in t if d == -1]
    if len(holes) > 1 or any(d < -1 for d in t):
        return False
    if holes:
        rest = shape_prod([d for d in t if d != -1])
        return rest != 0 and shape_prod(s) % rest == 0
    return shape_prod(s) == shape_prod(t)


def reshape_shape(s, t):
    if not is_reshapeable(s, t):
        raise EvalError(f"cannot reshape {list(s)} into {list(t)}")
    if -1 in t:
        rest = shape_prod([d for d in t if d != -1])
        return tuple(shape_prod(s) // rest if d == -1 else d for d in t)
    return tuple(t)


def matmul_shape(s, t):
    """Batched matrix product: `[..b, n, k] x [..c, k, m]`."""
    if len(s) < 2 or len(t) < 2 or s[-1] != t[-2]:
        raise EvalError(f"cannot multiply shapes {list(s)} and {list(t)}")
    return broadcast_shape(s[:-2], t[:-2]) + (s[-2], t[-1])


def _index(i, s, allow_end=False):
    bound = len(s) + (1 if allow_end else 0)
    if not 0 <= i < bound:
        raise EvalError(f"index {i} out of range for {list(s)}")
    return i


#******************************************************************************
#                                Evaluation
#******************************************************************************

def eval_expr(e, assignment):
    # type: (Expr, Mapping[str, object]) -> int | bool | tuple
    """
    Value of `e` under `assignment`, which maps int variables to ints,
    bool variables to bools, and list and tensor variables to tuples
    (a tensor is given by its shape).
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, Var):
        if e.name not in assignment:
            raise EvalError(f"unbound variable {e.name}")
        return assignment[e.name]
    if isinstance(e, ShapeOf):
        return tuple(eval_expr(e.arg, assignment))
    if isinstance(e, ShapeList):
        return tuple(eval_expr(i, assignment) for i in e.items)
    if isinstance(e, PredApp):
        raise EvalError("unsolved predicate variable", e)
    if type(e) not in _EVAL:
        raise EvalError(f"cannot evaluate {e!r}")
    handler = _EVAL[type(e)]
    if isinstance(e, And):
        return eval_expr(e.left, assignment) and eval_expr(e.right, assignment)
    if isinstance(e, Or):
        return eval_expr(e.left, assignment) or eval_expr(e.right, assignment)
    args = [eval_expr(getattr(e, f), assignment) for f in e.__dataclass_fields__]
    try:
        return handler(*args)
    except EvalError as exc:
        if exc.subterm is None:
            exc.subterm = e
        raise


def _head(s):
    if not s:
        raise EvalError("head of empty shape")
    return s[0]


def _last(s):
    if not s:
        raise EvalError("last of empty shape")
    return s[-1]


def _tail(s):
    if not s:
        raise EvalError("tail of empty shape")
    return s[1:]


def _init(s):
    if not s:
        raise EvalError("init of empty shape")
    return s[:-1]


def _swap(i, j, s):
    _index(i, s)
    _index(j, s)
    out = list(s)
    out[i], out[j] = out[j], out[i]
    return tuple(out)


_EVAL = {
    Neg: lambda a: -a,
    Add: lambda a, b: a + b,
    Mul: lambda a, b: a * b,
    Div: int_div,
    Head: _head,
    Last: _last,
    Len: len,
    Nth: lambda i, s: s[_index(i, s)],
    Prod: shape_prod,
    Cons: lambda h, t: (h,) + t,
    Append: lambda a, b: a + b,
    Tail: _tail,
    Init: _init,
    InsertAt: lambda i, n, s: s[:_index(i, s, True)] + (n,) + s[i:],
    DropAt: lambda i, s: s[:_index(i, s)] + s[i + 1:],
    Swap: _swap,
    Reshape: reshape_shape,
    Broadcast: broadcast_shape,
    Matmul: matmul_shape,
    Eq: lambda a, b: a == b,
    Le: lambda a, b: a <= b,
    Lt: lambda a, b: a < b,
    Not: lambda a: not a,
    And: None,
    Or: None,
    Broadcastable: is_broadcastable,
    Reshapeable: is_reshapeable,
}


def holds(p, assignment):
    """Truth of predicate `p`; an `EvalError` counts as false."""
    try:
        return bool(eval_expr(p, assignment))
    except EvalError:
        return False


def literal(value):
    # type: (int | bool | tuple) -> Expr
    if isinstance(value, bool):
        return BoolConst(value)
    if isinstance(value, int):
        return Num(value)
    return shape_lit(value)


def is_ground(e):
    return not free_vars(e) and not has_pred_app(e)


_PARTIAL = (Nth, Head, Last, Div, Tail, Init, InsertAt, DropAt, Swap, Reshape, Broadcast, Matmul)


@lru_cache(maxsize=1 << 16)
def is_total(e):
    # type: (Expr) -> bool
    """Whether `e` evaluates without error under every assignment of its variables."""
    if isinstance(e, PredApp):
        return False
    if isinstance(e, Div) and isinstance(e.right, Num) and e.right.value != 0:
        return is_total(e.left)
    if isinstance(e, _PARTIAL):
        return False
    return all(is_total(c) for c in children(e))


def _all_total(items):
    return all(is_total(i) for i in items)


def partial_terms(e):
    # type: (Expr) -> set
    """
    Partial subterms of `e` that are always evaluated when `e` is, that
    is, outside connectives and predicate applications. `e` holding
    means every one of them is defined.
    """
    out, stack = set(), [e]
    while stack:
        node = stack.pop()
        if isinstance(node, (And, Or, PredApp)):
            continue
        if isinstance(node, _PARTIAL):
            out.add(node)
        stack.extend(children(node))
    return out


#******************************************************************************
#                               Simplification
#******************************************************************************

@lru_cache(maxsize=1 << 16)
def simplify(e):
    # type: (Expr) -> Expr
    """
    Bottom-up simplification. Ground subterms are evaluated,
    constructor/destructor pairs on literal shapes are fused, equalities
    between literal shapes are split per dimension, and boolean
    connectives are flattened.

    A rewrite that drops a subterm only fires when the dropped part is
    total, so the result raises `EvalError` exactly when `e` does.
    """
    if isinstance(e, (Var, Num, BoolConst)):
        return e
    if isinstance(e, PredApp):
        return e
    e = map_children(e, simplify)
    return _node(e)


def _node(e):
    if is_ground(e) and not isinstance(e, (ShapeList, ShapeOf)):
        try:
            return literal(eval_expr(e, {}))
        except EvalError:
            return e
    rule = _RULES.get(type(e))
    return rule(e) if rule else e


def _items(s):
    return s.items if isinstance(s, ShapeList) else None


def _len(e):
    items = _items(e.arg)
    if items is not None:
        return Num(len(items)) if _all_total(items) else e
    if isinstance(e.arg, Cons) and is_total(e.arg.head):
        return _node(Add(Num(1), _node(Len(e.arg.tail))))
    if isinstance(e.arg, Append):
        return _node(Add(_node(Len(e.arg.left)), _node(Len(e.arg.right))))
    return e


def _nth(e):
    items = _items(e.arg)
    if isinstance(e.index, Num):
        i = e.index.value
        if items is not None and 0 <= i < len(items):
            return items[i] if _all_total(items[:i] + items[i + 1:]) else e
        if isinstance(e.arg, Cons):
            if i == 0:
                return e.arg.head if is_total(e.arg.tail) else e
            if is_total(e.arg.head):
                return _node(Nth(Num(i - 1), e.arg.tail))
    return e


def _head_rule(e):
    items = _items(e.arg)
    if items and _all_total(items[1:]):
        return items[0]
    if isinstance(e.arg, Cons) and is_total(e.arg.tail):
        return e.arg.head
    return e


def _last_rule(e):
    items = _items(e.arg)
    if items and _all_total(items[:-1]):
        return items[-1]
    right = _items(e.arg.right) if isinstance(e.arg, Append) else None
    if right and is_total(e.arg.left) and _all_total(right[:-1]):
        return right[-1]
    return e


def _prod(e):
    items = _items(e.arg)
    if items is None:
        return e
    if not items:
        return Num(1)
    out = items[0]
    for item in items[1:]:
        out = _node(Mul(out, item))
    return out


def _tail_rule(e):
    items = _items(e.arg)
    if items and is_total(items[0]):
        return ShapeList(items[1:])
    if isinstance(e.arg, Cons) and is_total(e.arg.head):
        return e.arg.tail
    return e


def _init_rule(e):
    items = _items(e.arg)
    if items and is_total(items[-1]):
        return ShapeList(items[:-1])
    if isinstance(e.arg, Append):
        right = _items(e.arg.right)
        if right and is_total(right[-1]):
            return _node(Append(e.arg.left, ShapeList(right[:-1])))
    return e


def _cons(e):
    items = _items(e.tail)
    if items is not None:
        return ShapeList((e.head,) + items)
    return e


def _append(e):
    left, right = _items(e.left), _items(e.right)
    if left is not None and right is not None:
        return ShapeList(left + right)
    if left == ():
        return e.right
    if right == ():
        return e.left
    return e


def _insert_at(e):
    items = _items(e.arg)
    if items is not None and isinstance(e.index, Num) and 0 <= e.index.value <= len(items):
        i = e.index.value
        return ShapeList(items[:i] + (e.size,) + items[i:])
    return e


def _drop_at(e):
    items = _items(e.arg)
    if items is not None and isinstance(e.index, Num) and 0 <= e.index.value < len(items):
        i = e.index.value
        if is_total(items[i]):
            return ShapeList(items[:i] + items[i + 1:])
    return e


def _swap_rule(e):
    items = _items(e.arg)
    if items is not None and isinstance(e.i, Num) and isinstance(e.j, Num):
        i, j = e.i.value, e.j.value
        if 0 <= i < len(items) and 0 <= j < len(items):
            out = list(items)
            out[i], out[j] = out[j], out[i]
            return ShapeList(tuple(out))
    return e


def _add(e):
    if e.left == Num(0):
        return e.right
    if e.right == Num(0):
        return e.left
    return e


def _mul(e):
    if e.left == Num(1):
        return e.right
    if e.right == Num(1):
        return e.left
    return e


def _div(e):
    return e.left if e.right == Num(1) else e


def _neg(e):
    if isinstance(e.arg, Neg):
        return e.arg.arg
    return e


def _eq(e):
    left, right = e.left, e.right
    if left == right and is_total(left):
        return TRUE
    if isinstance(right, BoolConst):
        left, right = right, left
    if isinstance(left, BoolConst):
        return right if left.value else _node(Not(right))
    if isinstance(left, Cons) and not isinstance(right, Cons):
        left, right = right, left
    li, ri = _items(left), _items(right)
    if li is not None and ri is not None:
        if len(li) != len(ri):
            return FALSE if _all_total(li + ri) else e
        # per-dimension equalities short-circuit after the first pair
        if not _all_total(li[1:] + ri[1:]):
            return e
        return _and(And(TRUE, conj(*(simplify(Eq(a, b)) for a, b in zip(li, ri)))))
    if isinstance(right, Cons):
        if li == ():
            return FALSE if is_total(right) else e
        if li is not None and _all_total(li[1:]) and is_total(right.tail):
            return _and(And(simplify(Eq(li[0], right.head)), simplify(Eq(ShapeList(li[1:]), right.tail))))
        if isinstance(left, Cons) and is_total(left.tail) and is_total(right.tail):
            return _and(And(simplify(Eq(left.head, right.head)), simplify(Eq(left.tail, right.tail))))
    if isinstance(left, Num) and isinstance(right, Len) and left.value < 0 and is_total(right):
        return FALSE
    if isinstance(right, Num) and isinstance(left, Len) and right.value < 0 and is_total(left):
        return FALSE
    return e


def _le(e):
    # lengths are never negative
    if isinstance(e.right, Len) and isinstance(e.left, Num) and e.left.value <= 0 and is_total(e.right):
        return TRUE
    return e


def _lt(e):
    if isinstance(e.right, Len) and isinstance(e.left, Num) and e.left.value < 0 and is_total(e.right):
        return TRUE
    return e


def _not(e):
    arg = e.arg
    if isinstance(arg, BoolConst):
        return BoolConst(not arg.value)
    if isinstance(arg, Not):
        return arg.arg
    if isinstance(arg, Lt):
        return _le(Le(arg.right, arg.left))
    if isinstance(arg, Le):
        return _lt(Lt(arg.right, arg.left))
    return e


def _nest(cls, items):
    out = items[-1]
    for p in reversed(items[:-1]):
        out = cls(p, out)
    return out


def _and(e):
    flat = []
    for p in conjuncts(e):
        if p == FALSE:
            if _all_total(flat):
                return FALSE
            return _nest(And, flat + [p])
        if p not in flat:
            flat.append(p)
    if _all_total(flat) and any(negate(p) in flat for p in flat):
        return FALSE
    return conj(*flat)


def _or(e):
    flat = []
    for p in disjuncts(e):
        if p == TRUE:
            if _all_total(flat):
                return TRUE
            return _nest(Or, flat + [p])
        if p != FALSE and p not in flat:
            flat.append(p)
    if _all_total(flat) and any(negate(p) in flat for p in flat):
        return TRUE
    # absorption: a || (a && b) = a
    kept = [p for p in flat
            if not (isinstance(p, And) and is_total(p)
                    and any(q in conjuncts(p) for q in flat if q is not p))]
    return disj(*kept)


def _broadcastable(e):
    if not (is_total(e.left) and is_total(e.right)):
        return e
    if e.left == e.right:
        return TRUE
    li, ri = _items(e.left), _items(e.right)
    if li == () or ri == ():
        return TRUE
    if li is None or ri is None:
        return e
    pairs = zip(reversed(li), reversed(ri))
    one = Num(1)
    return simplify(conj(*(disj(simplify(Eq(a, b)), simplify(Eq(a, one)), simplify(Eq(b, one)))
                           for a, b in pairs)))


def _reshapeable(e):
    if e.left == e.right and isinstance(e.left, ShapeOf) and is_total(e.left):
        return TRUE
    return e


_RULES = {
    Len: _len, Nth: _nth, Head: _head_rule, Last: _last_rule, Prod: _prod,
    Tail: _tail_rule, Init: _init_rule, Cons: _cons, Append: _append,
    InsertAt: _insert_at, DropAt: _drop_at, Swap: _swap_rule,
    Add: _add, Mul: _mul, Div: _div, Neg: _neg,
    Eq: _eq, Le: _le, Lt: _lt, Not: _not, And: _and, Or: _or,
    Broadcastable: _broadcastable, Reshapeable: _reshapeable,
}


def negate(p):
    # type: (Expr) -> Expr
    """Syntactic negation, pushed through connectives and integer comparisons."""
    if isinstance(p, BoolConst):
        return BoolConst(not p.value)
    if isinstance(p, Not):
        return p.arg
    if isinstance(p, Le):
        return Lt(p.right, p.left)
    if isinstance(p, Lt):
        return Le(p.right, p.left)
    if isinstance(p, And):
        return disj(*(negate(q) for q in conjuncts(p)))
    if isinstance(p, Or):
        return conj(*(negate(q) for q in disjuncts(p)))
    return Not(p)


#******************************************************************************
#                            Linear integer forms
#******************************************************************************

ONE = Num(1)


def linear(e):
    # type: (Expr) -> dict[Expr, int]
    """
    `e` as a map from monomials to coefficients; `ONE` keys the
    constant. Anything that is not a sum, a negation, a numeral or a
    product with a numeral is a monomial.
    """
    if isinstance(e, Num):
        return {ONE: e.value} if e.value else {}
    if isinstance(e, Neg):
        return {m: -c for m, c in linear(e.arg).items()}
    if isinstance(e, Add):
        return _merge(linear(e.left), linear(e.right))
    if isinstance(e, Mul):
        if isinstance(e.left, Num):
            return {m: c * e.left.value for m, c in linear(e.right).items() if c * e.left.value}
        if isinstance(e.right, Num):
            return {m: c * e.right.value for m, c in linear(e.left).items() if c * e.right.value}
    return {e: 1}


def _merge(a, b, scale=1):
    out = dict(a)
    for m, c in b.items():
        total = out.get(m, 0) + scale * c
        if total:
            out[m] = total
        else:
            out.pop(m, None)
    return out


def difference(left, right):
    """Linear form of `left - right`."""
    return _merge(linear(left), linear(right), -1)


def from_linear(form):
    # type: (dict[Expr, int]) -> Expr
    """Rebuild an expression from a linear form, monomials in a stable order."""
    const = form.get(ONE, 0)
    monomials = sorted((m for m in form if m != ONE), key=repr)
    out = None
    for m in monomials:
        c = form[m]
        term = m if abs(c) == 1 else Mul(Num(abs(c)), m)
        if out is None:
            out = Neg(term) if c < 0 else term
        else:
            out = Add(out, Neg(term)) if c < 0 else Add(out, term)
    if out is None:
        return Num(const)
    if const:
        out = Add(out, Num(const))
    return out
