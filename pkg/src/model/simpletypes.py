"""Simple types module.

This module runs Hindley-Milner inference over the predicate-erased
program and annotates every term node with its simple type
(`Term.stype`). Bindings are monomorphic; shape polymorphism is the
business of the refinement layer.
"""
import logging
from dataclasses import dataclass, replace
from itertools import count

from model.ast import (
    Annot, App, Assert, Base, BaseType, Const, Fix, Fun, Ident, If, Lam, Let,
    Prim, PrimVal, Term, TensorVal,
)
from model.errors import UnboundVariable, UnificationError
from model.parser import Program, TopBinding

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TBase:
    base: BaseType

    def __str__(self):
        return str(self.base)


@dataclass(frozen=True)
class TArrow:
    dom: object
    cod: object

    def __str__(self):
        dom = f"({self.dom})" if isinstance(self.dom, TArrow) else str(self.dom)
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True)
class TVar:
    id: int

    def __str__(self):
        return f"'a{self.id}"


INT = TBase(BaseType.INT)
BOOL = TBase(BaseType.BOOL)
INT_LIST = TBase(BaseType.INT_LIST)
TENSOR = TBase(BaseType.TENSOR)


def erase(t):
    # type: (RType) -> TBase | TArrow
    """The simple type of a refinement type."""
    if isinstance(t, Base):
        return TBase(t.base)
    return TArrow(erase(t.dom), erase(t.cod))


def const_type(value):
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return INT
    return INT_LIST


def is_ground(t):
    if isinstance(t, TVar):
        return False
    if isinstance(t, TArrow):
        return is_ground(t.dom) and is_ground(t.cod)
    return True


class SimpleInference:
    """
    Unification-based inference over one program.

    Args:
        `stubs`: Mapping from stub names to their refinement types
        (type schemes are erased through their body).
    """

    def __init__(self, stubs):
        self.stubs = {name: erase(getattr(ty, "body", ty)) for name, ty in stubs.items()}
        self.subst = {}
        self._ids = count()
        self.defaulted = 0

    def fresh(self):
        return TVar(next(self._ids))

    #**************
    #*   Unify    *
    #**************

    def resolve(self, t):
        while isinstance(t, TVar) and t in self.subst:
            t = self.subst[t]
        return t

    def zonk(self, t):
        """`t` with every bound unification variable replaced."""
        t = self.resolve(t)
        if isinstance(t, TArrow):
            return TArrow(self.zonk(t.dom), self.zonk(t.cod))
        return t

    def occurs(self, var, t):
        t = self.resolve(t)
        if t == var:
            return True
        if isinstance(t, TArrow):
            return self.occurs(var, t.dom) or self.occurs(var, t.cod)
        return False

    def unify(self, left, right, span=None):
        a, b = self.resolve(left), self.resolve(right)
        if a == b:
            return
        if isinstance(a, TVar) or isinstance(b, TVar):
            var, other = (a, b) if isinstance(a, TVar) else (b, a)
            if self.occurs(var, other):
                raise UnificationError(self.zonk(var), self.zonk(other), span)
            self.subst[var] = other
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            self.unify(a.dom, b.dom, span)
            self.unify(a.cod, b.cod, span)
            return
        raise UnificationError(self.zonk(left), self.zonk(right), span)

    #**************
    #*    Walk    *
    #**************

    def infer(self, t, env):
        # type: (Term, dict) -> Term
        """Return `t` with `stype` set on every node (possibly open)."""
        if isinstance(t, Const):
            return replace(t, stype=const_type(t.value))
        if isinstance(t, TensorVal):
            return replace(t, stype=TENSOR)
        if isinstance(t, Ident):
            ty = env.get(t.name)
            if ty is None:
                ty = self.stubs.get(t.name)
            if ty is None:
                raise UnboundVariable(t.name, t.span)
            return replace(t, stype=ty)
        if isinstance(t, (Prim, PrimVal)):
            if t.ty is None:
                raise UnboundVariable(t.name, t.span)
            return replace(t, stype=erase(t.ty))
        if isinstance(t, Lam):
            dom = erase(t.ann) if t.ann is not None else self.fresh()
            body = self.infer(t.body, {**env, t.var: dom})
            return replace(t, body=body, stype=TArrow(dom, body.stype))
        if isinstance(t, App):
            fn = self.infer(t.fn, env)
            arg = self.infer(t.arg, env)
            out = self.fresh()
            self.unify(fn.stype, TArrow(arg.stype, out), t.span)
            return replace(t, fn=fn, arg=arg, stype=out)
        if isinstance(t, Annot):
            inner = self.infer(t.term, env)
            ty = erase(t.ty)
            self.unify(inner.stype, ty, t.span)
            return replace(t, term=inner, stype=ty)
        if isinstance(t, Let):
            rhs = self.infer(t.rhs, env)
            if t.ann is not None:
                self.unify(rhs.stype, erase(t.ann), t.span)
            body = self.infer(t.body, {**env, t.var: rhs.stype})
            return replace(t, rhs=rhs, body=body, stype=body.stype)
        if isinstance(t, Fix):
            ty = erase(t.ann) if t.ann is not None else TArrow(self.fresh(), self.fresh())
            if not isinstance(ty, TArrow):
                raise UnificationError(ty, "a function type", t.span)
            body = self.infer(t.body, {**env, t.fn: ty, t.var: ty.dom})
            self.unify(body.stype, ty.cod, t.span)
            return replace(t, body=body, stype=ty)
        if isinstance(t, If):
            cond = self.infer(t.cond, env)
            self.unify(cond.stype, BOOL, t.cond.span or t.span)
            then = self.infer(t.then, env)
            else_ = self.infer(t.else_, env)
            self.unify(then.stype, else_.stype, t.span)
            if t.ann is not None:
                self.unify(then.stype, erase(t.ann), t.span)
            return replace(t, cond=cond, then=then, else_=else_, stype=then.stype)
        if isinstance(t, Assert):
            body = self.infer(t.body, env)
            return replace(t, body=body, stype=body.stype)
        raise TypeError(f"not a term: {t!r}")

    def ground(self, t):
        """Replace open `stype`s by their solution, defaulting leftovers to int."""
        ty = self._default(self.zonk(t.stype))
        changes = {"stype": ty}
        for name in ("fn", "arg", "term", "rhs", "body", "cond", "then", "else_"):
            child = getattr(t, name, None)
            if isinstance(child, Term):
                changes[name] = self.ground(child)
        return replace(t, **changes)

    def _default(self, t):
        if isinstance(t, TVar):
            self.unify(t, INT)
            self.defaulted += 1
            return INT
        if isinstance(t, TArrow):
            return TArrow(self._default(t.dom), self._default(t.cod))
        return t


def infer_simple(program, stubs):
    # type: (Program, Mapping[str, RType]) -> Program
    """
    Annotate every node of `program` with its simple type.

    Args:
        `program`: Parsed program, in A-normal form.

        `stubs`: Stub name to refinement type (or type scheme).

    Raises:
        `UnificationError`: Clash or occurs check, with both types and the span.

        `UnboundVariable`: A name is neither bound nor a stub.
    """
    inference = SimpleInference(stubs)
    env, bindings = {}, []
    for binding in program.bindings:
        term = inference.infer(binding.term, env)
        env[binding.name] = term.stype
        bindings.append(term)
    out = []
    for binding, term in zip(program.bindings, bindings):
        out.append(TopBinding(binding.name, inference.ground(term), binding.span, binding.is_main))
    if inference.defaulted:
        logger.warning("%d unconstrained simple type variable(s) defaulted to int",
                       inference.defaulted)
    return Program(out, program.stubs)
