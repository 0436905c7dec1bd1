"""Abstract syntax.

This module holds the expression trees of the refinement logic
(sizes, shapes and predicates), predicate variables, refinement types,
type environments, and the terms shared by the source and target
languages, together with capture-avoiding substitution over all of them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Iterator, Mapping, Optional

from utils.fresh import fresh_name


class BaseType(Enum):
    BOOL = "bool"
    INT = "int"
    INT_LIST = "int list"
    TENSOR = "tensor"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


#******************************************************************************
#                               Expressions
#******************************************************************************

@dataclass(frozen=True)
class Expr:
    """Base class of sizes, shapes and predicates."""


@dataclass(frozen=True)
class Var(Expr):
    """A program variable of any sort. Tensor variables are only
    meaningful under `ShapeOf` or as predicate variable arguments."""
    name: str


# sizes

@dataclass(frozen=True)
class Num(Expr):
    value: int


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Head(Expr):
    arg: Expr


@dataclass(frozen=True)
class Last(Expr):
    arg: Expr


@dataclass(frozen=True)
class Len(Expr):
    arg: Expr


@dataclass(frozen=True)
class Nth(Expr):
    index: Expr
    arg: Expr


@dataclass(frozen=True)
class Prod(Expr):
    arg: Expr


# shapes

@dataclass(frozen=True)
class ShapeList(Expr):
    items: tuple


@dataclass(frozen=True)
class ShapeOf(Expr):
    arg: Expr


@dataclass(frozen=True)
class Cons(Expr):
    head: Expr
    tail: Expr


@dataclass(frozen=True)
class Append(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Tail(Expr):
    arg: Expr


@dataclass(frozen=True)
class Init(Expr):
    arg: Expr


@dataclass(frozen=True)
class InsertAt(Expr):
    index: Expr
    size: Expr
    arg: Expr


@dataclass(frozen=True)
class DropAt(Expr):
    index: Expr
    arg: Expr


@dataclass(frozen=True)
class Swap(Expr):
    i: Expr
    j: Expr
    arg: Expr


@dataclass(frozen=True)
class Reshape(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Broadcast(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Matmul(Expr):
    left: Expr
    right: Expr


# predicates

@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Le(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Lt(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Broadcastable(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Reshapeable(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class PredVar:
    """
    An unknown refinement `p_id(inputs)`.

    Args:
        `id`: Identity; two predicate variables are equal iff their ids are.

        `inputs`: Formal parameters as `(name, BaseType)` pairs, the
        environment dependencies first, then the refinement binder.

        `n_deps`: How many of `inputs` come from the environment.

        `origin`: Creation counter, used to tell which variables were
        created while a given let right-hand side was walked.
    """
    id: int
    inputs: tuple
    n_deps: int
    origin: int

    def __eq__(self, other):
        return isinstance(other, PredVar) and other.id == self.id

    def __hash__(self):
        return hash(("predvar", self.id))

    @property
    def name(self):
        return f"p{self.id}"

    @property
    def formals(self):
        return tuple(name for name, _ in self.inputs)


@dataclass(frozen=True)
class PredApp(Expr):
    var: PredVar
    args: tuple


TRUE = BoolConst(True)
FALSE = BoolConst(False)

_FIELDS: dict = {}


def _field_names(cls):
    names = _FIELDS.get(cls)
    if names is None:
        names = tuple(f.name for f in fields(cls))
        _FIELDS[cls] = names
    return names


def children(e):
    # type: (Expr) -> Iterator[Expr]
    for name in _field_names(type(e)):
        value = getattr(e, name)
        if isinstance(value, Expr):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Expr):
                    yield item


def map_children(e, fn):
    # type: (Expr, Callable[[Expr], Expr]) -> Expr
    """Rebuild `e` with `fn` applied to every direct subexpression."""
    changed = False
    values = {}
    for name in _field_names(type(e)):
        value = getattr(e, name)
        if isinstance(value, Expr):
            new = fn(value)
        elif isinstance(value, tuple):
            new = tuple(fn(item) if isinstance(item, Expr) else item for item in value)
        else:
            new = value
        if new is not value and new != value:
            changed = True
        values[name] = new
    return type(e)(**values) if changed else e


def walk(e):
    """Pre-order traversal of `e`."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(children(node))))


@lru_cache(maxsize=1 << 16)
def free_vars(e):
    # type: (Expr) -> frozenset[str]
    if isinstance(e, Var):
        return frozenset((e.name,))
    out = frozenset()
    for c in children(e):
        out |= free_vars(c)
    return out


def pred_vars(e):
    # type: (Expr) -> set[PredVar]
    return {node.var for node in walk(e) if isinstance(node, PredApp)}


def has_pred_app(e):
    return any(isinstance(node, PredApp) for node in walk(e))


def subst_expr(e, mapping):
    # type: (Expr, Mapping[str, Expr]) -> Expr
    """
    Simultaneous substitution of the variables named in `mapping`.

    A tensor variable under `ShapeOf` keeps the `ShapeOf` when it is
    replaced by another variable and loses it when it is replaced by a
    shape, so values of tensor sort are always given by their shape.
    """
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, ShapeOf) and isinstance(e.arg, Var):
        new = mapping.get(e.arg.name)
        if new is None:
            return e
        return ShapeOf(new) if isinstance(new, Var) else new
    if isinstance(e, (Num, BoolConst)):
        return e
    return map_children(e, lambda c: subst_expr(c, mapping))


def conj(*preds):
    # type: (*Expr) -> Expr
    """Right-nested conjunction, dropping `true` and collapsing on `false`."""
    flat = []
    for p in preds:
        for q in conjuncts(p):
            if q == FALSE:
                return FALSE
            if q != TRUE and q not in flat:
                flat.append(q)
    if not flat:
        return TRUE
    out = flat[-1]
    for q in reversed(flat[:-1]):
        out = And(q, out)
    return out


def disj(*preds):
    flat = []
    for p in preds:
        for q in disjuncts(p):
            if q == TRUE:
                return TRUE
            if q != FALSE and q not in flat:
                flat.append(q)
    if not flat:
        return FALSE
    out = flat[-1]
    for q in reversed(flat[:-1]):
        out = Or(q, out)
    return out


def conjuncts(p):
    # type: (Expr) -> list[Expr]
    if isinstance(p, And):
        return conjuncts(p.left) + conjuncts(p.right)
    if p == TRUE:
        return []
    return [p]


def disjuncts(p):
    if isinstance(p, Or):
        return disjuncts(p.left) + disjuncts(p.right)
    return [p]


def shape_lit(dims):
    """`ShapeList` of numerals."""
    return ShapeList(tuple(Num(int(d)) for d in dims))


def value_of(base, name):
    """The expression denoting variable `name` of sort `base` inside a predicate."""
    var = Var(name)
    return ShapeOf(var) if base is BaseType.TENSOR else var


def self_eq(binder, name, base):
    # type: (str, str, BaseType) -> Expr
    """`binder = name`, or `shape binder = shape name` for tensors."""
    return Eq(value_of(base, binder), value_of(base, name))


#******************************************************************************
#                                  Types
#******************************************************************************

@dataclass(frozen=True)
class RType:
    """Base class of refinement types."""


@dataclass(frozen=True)
class Base(RType):
    """`{var : base | pred}`."""
    var: str
    base: BaseType
    pred: Expr


@dataclass(frozen=True)
class Fun(RType):
    """`var : dom -> cod`, `var` bound in `cod`."""
    var: str
    dom: RType
    cod: RType


def base_type(base, pred=TRUE, var="v"):
    return Base(var, base, pred)


def self_type(name, base, binder="v"):
    # type: (str, BaseType, str) -> Base
    """The singleton refinement of variable `name`."""
    return Base(binder, base, self_eq(binder, name, base))


def type_free_vars(t):
    # type: (RType) -> frozenset[str]
    if isinstance(t, Base):
        return free_vars(t.pred) - {t.var}
    return type_free_vars(t.dom) | (type_free_vars(t.cod) - {t.var})


def type_pred_vars(t):
    if isinstance(t, Base):
        return pred_vars(t.pred)
    return type_pred_vars(t.dom) | type_pred_vars(t.cod)


def rename_binder(t, new):
    # type: (RType, str) -> RType
    """Alpha-rename the outermost binder of `t` to `new`."""
    if t.var == new:
        return t
    if isinstance(t, Base):
        return Base(new, t.base, subst_expr(t.pred, {t.var: Var(new)}))
    return Fun(new, t.dom, subst_type(t.cod, {t.var: Var(new)}))


def subst_type(t, mapping):
    # type: (RType, Mapping[str, Expr]) -> RType
    """Capture-avoiding simultaneous substitution into a type."""
    if not mapping:
        return t
    if isinstance(t, Fun):
        dom = subst_type(t.dom, mapping)
    inner = {k: v for k, v in mapping.items() if k != t.var}
    if inner:
        incoming = frozenset().union(*(free_vars(v) for v in inner.values()))
        if t.var in incoming:
            avoid = set(incoming) | set(inner) | type_free_vars(t) | _binders(t)
            t = rename_binder(t, fresh_name(t.var, avoid))
    if isinstance(t, Base):
        pred = subst_expr(t.pred, inner) if inner else t.pred
        return t if pred is t.pred else Base(t.var, t.base, pred)
    cod = subst_type(t.cod, inner) if inner else t.cod
    return Fun(t.var, dom, cod)


def _binders(t):
    if isinstance(t, Base):
        return {t.var}
    return {t.var} | _binders(t.dom) | _binders(t.cod)


def map_type_preds(t, fn):
    # type: (RType, Callable[[Expr], Expr]) -> RType
    """Apply `fn` to every refinement in `t`."""
    if isinstance(t, Base):
        pred = fn(t.pred)
        return t if pred is t.pred else Base(t.var, t.base, pred)
    return Fun(t.var, map_type_preds(t.dom, fn), map_type_preds(t.cod, fn))


def meet(t1, t2):
    # type: (RType, RType) -> RType
    """Conjunction of the refinements of two types of the same shape."""
    if isinstance(t1, Base) and isinstance(t2, Base):
        t2 = rename_binder(t2, t1.var)
        return Base(t1.var, t1.base, conj(t1.pred, t2.pred))
    if isinstance(t1, Fun) and isinstance(t2, Fun):
        t2 = rename_binder(t2, t1.var)
        return Fun(t1.var, meet(t1.dom, t2.dom), meet(t1.cod, t2.cod))
    raise TypeError(f"cannot meet {t1} and {t2}")


def is_trivial(t):
    """Whether every refinement of `t` is `true`."""
    if isinstance(t, Base):
        return t.pred == TRUE
    return is_trivial(t.dom) and is_trivial(t.cod)


def result_type(t):
    while isinstance(t, Fun):
        t = t.cod
    return t


class TypeEnv:
    """
    Ordered, persistent map from variable names to types
    (or type schemes for polymorphic stubs and bindings).
    `extend` returns a new environment and leaves this one untouched.
    """
    __slots__ = ("_items", "_index")

    def __init__(self, items=()):
        self._items = tuple(items)
        self._index = {name: ty for name, ty in self._items}

    def extend(self, name, ty):
        # type: (str, Any) -> TypeEnv
        env = TypeEnv.__new__(TypeEnv)
        env._items = self._items + ((name, ty),)
        env._index = dict(self._index)
        env._index[name] = ty
        return env

    def lookup(self, name):
        return self._index.get(name)

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def names(self):
        return set(self._index)

    def base_bindings(self):
        """`(name, Base)` pairs in binding order, last binding winning."""
        seen = {}
        for name, ty in self._items:
            seen.pop(name, None)
            seen[name] = ty
        return [(n, t) for n, t in seen.items() if isinstance(t, Base)]

    def refine(self):
        # type: () -> Expr
        """The conjunction of every base binding's refinement, instantiated at its name."""
        return conj(*(subst_expr(t.pred, {t.var: Var(n)}) for n, t in self.base_bindings()))

    def st(self):
        # type: () -> tuple
        """`(name, BaseType)` for every base binding, in binding order."""
        return tuple((n, t.base) for n, t in self.base_bindings())

    def fun_binders(self):
        """Base-sorted binders of function-typed entries (the `y` of `y:τ1 -> τ2`)."""
        out = []
        for _, ty in self._items:
            while isinstance(ty, Fun):
                if isinstance(ty.dom, Base):
                    out.append((ty.var, ty.dom.base))
                ty = ty.cod
        return out


#******************************************************************************
#                                  Terms
#******************************************************************************

@dataclass(frozen=True)
class Term:
    """Base class of source and target terms."""
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)
    stype: Any = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Const(Term):
    """Integer, boolean, or integer list (a tuple) constant."""
    value: Any


@dataclass(frozen=True)
class Ident(Term):
    name: str


@dataclass(frozen=True)
class Lam(Term):
    var: str
    ann: Optional[RType]
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Annot(Term):
    term: Term
    ty: RType


@dataclass(frozen=True)
class Let(Term):
    """
    `let var : ann = rhs in body`. `scope` is the type of the whole let
    when the binder had to be abstracted away from the body's type.
    """
    var: str
    rhs: Term
    body: Term
    ann: Optional[RType] = None
    scope: Optional[RType] = None


@dataclass(frozen=True)
class Fix(Term):
    """`fix fn : ann. fun var -> body`."""
    fn: str
    ann: Optional[RType]
    var: str
    body: Term


@dataclass(frozen=True)
class If(Term):
    """Conditional over a variable; `ann` is the join type of the branches."""
    cond: Term
    then: Term
    else_: Term
    ann: Optional[RType] = None


@dataclass(frozen=True)
class Assert(Term):
    """`assert(pred, body)`: evaluate `pred`, blame on false, else continue with `body`."""
    pred: Expr
    body: Term


@dataclass(frozen=True)
class Prim(Term):
    """A stub or built-in function, with its instantiated type."""
    name: str
    ty: Optional[RType] = field(default=None, compare=False)


@dataclass(frozen=True)
class TensorVal(Term):
    """Runtime tensor; only its shape is tracked."""
    shape: tuple


@dataclass(frozen=True)
class PrimVal(Term):
    """A primitive partially applied to values."""
    name: str
    args: tuple
    ty: Optional[RType] = field(default=None, compare=False)


def is_value(t):
    return isinstance(t, (Const, Lam, Fix, Prim, TensorVal, PrimVal, Ident))


def value_expr(t):
    # type: (Term) -> Optional[Expr]
    """The logic expression denoting value `t`, or None for functions."""
    if isinstance(t, Const):
        if isinstance(t.value, bool):
            return BoolConst(t.value)
        if isinstance(t.value, int):
            return Num(t.value)
        return shape_lit(t.value)
    if isinstance(t, TensorVal):
        return shape_lit(t.shape)
    if isinstance(t, Ident):
        return Var(t.name)
    return None


def term_free_vars(t):
    # type: (Term) -> set[str]
    """Free identifiers of `t`, including those mentioned by its annotations and asserts."""
    if isinstance(t, (Const, TensorVal)):
        return set()
    if isinstance(t, Prim):
        return set()
    if isinstance(t, PrimVal):
        return set().union(*(term_free_vars(a) for a in t.args)) if t.args else set()
    if isinstance(t, Ident):
        return {t.name}
    if isinstance(t, Lam):
        out = term_free_vars(t.body) - {t.var}
        return out | (set(type_free_vars(t.ann)) if t.ann else set())
    if isinstance(t, App):
        return term_free_vars(t.fn) | term_free_vars(t.arg)
    if isinstance(t, Annot):
        return term_free_vars(t.term) | type_free_vars(t.ty)
    if isinstance(t, Let):
        out = term_free_vars(t.rhs) | (term_free_vars(t.body) - {t.var})
        for ty in (t.ann, t.scope):
            if ty is not None:
                out |= type_free_vars(ty)
        return out
    if isinstance(t, Fix):
        out = term_free_vars(t.body) - {t.fn, t.var}
        return out | (set(type_free_vars(t.ann)) if t.ann else set())
    if isinstance(t, If):
        out = term_free_vars(t.cond) | term_free_vars(t.then) | term_free_vars(t.else_)
        return out | (set(type_free_vars(t.ann)) if t.ann else set())
    if isinstance(t, Assert):
        return set(free_vars(t.pred)) | term_free_vars(t.body)
    raise TypeError(f"not a term: {t!r}")


def term_binders(t):
    """Every name bound anywhere inside `t`."""
    out = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Lam):
            out.add(node.var)
            stack.append(node.body)
        elif isinstance(node, Let):
            out.add(node.var)
            stack += [node.rhs, node.body]
        elif isinstance(node, Fix):
            out |= {node.fn, node.var}
            stack.append(node.body)
        elif isinstance(node, App):
            stack += [node.fn, node.arg]
        elif isinstance(node, Annot):
            stack.append(node.term)
        elif isinstance(node, If):
            stack += [node.cond, node.then, node.else_]
        elif isinstance(node, Assert):
            stack.append(node.body)
        elif isinstance(node, PrimVal):
            stack += list(node.args)
    return out


def rename_term(t, mapping):
    # type: (Term, Mapping[str, str]) -> Term
    """Rename free identifiers (and their occurrences in types) by `mapping`."""
    return subst_term_many(t, {old: Ident(new) for old, new in mapping.items()})


def subst_term(value, name, t):
    # type: (Term, str, Term) -> Term
    """`t[value/name]`, renaming binders that would capture free names of `value`."""
    return subst_term_many(t, {name: value})


def subst_term_many(t, mapping):
    # type: (Term, Mapping[str, Term]) -> Term
    if not mapping:
        return t
    exprs = {}
    for name, value in mapping.items():
        e = value_expr(value)
        if e is not None:
            exprs[name] = e
    return _Substituter(mapping, exprs).term(t)


class _Substituter:

    def __init__(self, mapping, exprs):
        self.mapping = dict(mapping)
        self.exprs = dict(exprs)
        self.incoming = set()
        for value in self.mapping.values():
            self.incoming |= term_free_vars(value)

    def _without(self, *names):
        if not any(n in self.mapping for n in names):
            return self
        sub = _Substituter.__new__(_Substituter)
        sub.mapping = {k: v for k, v in self.mapping.items() if k not in names}
        sub.exprs = {k: v for k, v in self.exprs.items() if k not in names}
        sub.incoming = self.incoming
        return sub

    def _fresh(self, name, body):
        avoid = self.incoming | term_free_vars(body) | term_binders(body) | set(self.mapping)
        return fresh_name(name, avoid)

    def ty(self, ty):
        return subst_type(ty, self.exprs) if ty is not None else None

    def term(self, t):
        if not self.mapping:
            return t
        if isinstance(t, (Const, TensorVal, Prim)):
            return t
        if isinstance(t, Ident):
            return self.mapping.get(t.name, t)
        if isinstance(t, PrimVal):
            return PrimVal(t.name, tuple(self.term(a) for a in t.args), t.ty, span=t.span, stype=t.stype)
        if isinstance(t, App):
            return App(self.term(t.fn), self.term(t.arg), span=t.span, stype=t.stype)
        if isinstance(t, Annot):
            return Annot(self.term(t.term), self.ty(t.ty), span=t.span, stype=t.stype)
        if isinstance(t, If):
            return If(self.term(t.cond), self.term(t.then), self.term(t.else_), self.ty(t.ann),
                      span=t.span, stype=t.stype)
        if isinstance(t, Assert):
            return Assert(subst_expr(t.pred, self.exprs), self.term(t.body), span=t.span, stype=t.stype)
        if isinstance(t, Lam):
            var, body = self._bind(t.var, t.body)
            return Lam(var, self.ty(t.ann), self._without(var).term(body), span=t.span, stype=t.stype)
        if isinstance(t, Let):
            rhs = self.term(t.rhs)
            var, body = self._bind(t.var, t.body)
            return Let(var, rhs, self._without(var).term(body), self.ty(t.ann), self.ty(t.scope),
                       span=t.span, stype=t.stype)
        if isinstance(t, Fix):
            fn, body = self._bind(t.fn, t.body)
            var, body = self._bind(t.var, body)
            return Fix(fn, self.ty(t.ann), var, self._without(fn, var).term(body), span=t.span, stype=t.stype)
        raise TypeError(f"not a term: {t!r}")

    def _bind(self, var, body):
        if var in self.mapping or var not in self.incoming:
            return var, body
        new = self._fresh(var, body)
        return new, rename_term(body, {var: new})
