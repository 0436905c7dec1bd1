"""Elaboration module.

Phase 3 of the checker. Compares the types met in the solved program
by consistent subtyping, rejects the casts whose refinements are
disjoint and inserts an `assert` for every cast that cannot be proved
statically. The result is a target program; `check_target` type-checks
it again independently of the elaborator.
"""
import logging
from dataclasses import dataclass, field, replace

from model.ast import (
    App, Annot, Assert, Base, BaseType, Const, Eq, Fix, Fun, Ident, If, Lam, Let,
    Not, Prim, PrimVal, ShapeOf, TensorVal, TypeEnv, Var, TRUE, conj, conjuncts,
    free_vars, map_children, map_type_preds, meet, rename_binder, self_eq, self_type,
    shape_lit, subst_expr, subst_type, term_free_vars, type_free_vars, value_expr,
    value_of,
)
from model.errors import RejectedCast, ShapeMismatch, TargetTypeError, WfError
from model.infer import const_rtype
from model.logic import simplify
from model.parser import Program, TopBinding
from model.printer import print_expr, print_type, print_witness
from model.solver import Verdict, check_sat, check_validity
from model.sorts import wf_type
from utils.fresh import fresh_name

logger = logging.getLogger(__name__)


#******************************************************************************
#                                Subtyping
#******************************************************************************

def _avoid(env, *types):
    out = env.names()
    for t in types:
        out |= type_free_vars(t) | _binders(t)
    return out


def _binders(t):
    if isinstance(t, Base):
        return {t.var}
    return {t.var} | _binders(t.dom) | _binders(t.cod)


def _base_query(env, path, left, right):
    """Prefix, hypothesis and goal of `left <: right` at base type."""
    if left.base is not right.base:
        raise ShapeMismatch(f"{print_type(left)} is not comparable with {print_type(right)}")
    x = fresh_name(right.var, _avoid(env, left, right) | free_vars(path))
    prefix = env.st() + ((x, right.base),)
    hyp = conj(env.refine(), path, subst_expr(left.pred, {left.var: Var(x)}))
    goal = subst_expr(right.pred, {right.var: Var(x)})
    return x, prefix, hyp, goal


def _common_binder(env, left, right):
    """Rename two function types to one binder free in `env`."""
    x = left.var
    if x in env.names() or x in type_free_vars(left) | type_free_vars(right):
        x = fresh_name(x, _avoid(env, left, right))
    return rename_binder(left, x), rename_binder(right, x)


def subtype(env, path, left, right):
    # type: (TypeEnv, Expr, RType, RType) -> Verdict
    """
    Decide `env; path |- left <: right`.

    Domains are compared contravariantly, codomains under `env`
    extended with the right-hand domain. The verdict is VALID when
    every base comparison is valid, INVALID when one of them is, and
    UNKNOWN otherwise.

    Raises:
        `ShapeMismatch`: The two types have different simple types.
    """
    if isinstance(left, Base) and isinstance(right, Base):
        _, prefix, hyp, goal = _base_query(env, path, left, right)
        verdict = check_validity(prefix, hyp, goal).verdict
        if verdict is Verdict.UNKNOWN:
            logger.debug("unknown: %s |- %s", print_expr(hyp), print_expr(goal))
        return verdict
    if isinstance(left, Fun) and isinstance(right, Fun):
        left, right = _common_binder(env, left, right)
        dom = subtype(env, path, right.dom, left.dom)
        if dom is Verdict.INVALID:
            return dom
        cod = subtype(env.extend(right.var, right.dom), path, left.cod, right.cod)
        if Verdict.INVALID in (dom, cod):
            return Verdict.INVALID
        return Verdict.VALID if dom is cod is Verdict.VALID else Verdict.UNKNOWN
    raise ShapeMismatch(f"{print_type(left)} is not comparable with {print_type(right)}")


#******************************************************************************
#                                  Casts
#******************************************************************************

@dataclass
class CastResult:
    """
    Outcome of `source <~ target`: either an assertion over the cast
    value (base types) or a wrapper built from the domain and codomain
    casts (function types).

    Args:
        `source`, `target`: The compared types.

        `var`: Binder the predicates are stated over.

        `pred`: Asserted predicate of a base cast; `true` when the
        subtyping was proved.

        `dom`, `cod`: Component casts of a function cast.

        `avoid`: Names the wrapper must not capture.
    """
    source: object
    target: object
    var: str
    pred: object = TRUE
    dom: "CastResult" = None
    cod: "CastResult" = None
    avoid: frozenset = field(default_factory=frozenset)

    @property
    def trivial(self):
        if self.dom is None:
            return self.pred == TRUE
        return self.dom.trivial and self.cod.trivial

    @property
    def preds(self):
        """Every asserted predicate, over the binders of the cast."""
        if self.dom is None:
            return () if self.pred == TRUE else (self.pred,)
        return self.dom.preds + self.cod.preds

    @property
    def coercion(self):
        # type: () -> Lam
        """The cast as a function term of type `source -> target`."""
        x = fresh_name("c", self.avoid)
        return Lam(x, self.source, self.apply(Ident(x)))

    def apply(self, operand, span=None):
        # type: (Term, Span) -> Term
        """The cast applied to the variable or constant `operand`."""
        if self.trivial:
            return operand
        if self.dom is None:
            pred = subst_expr(self.pred, {self.var: value_expr(operand)})
            return Assert(pred, operand, span=span)
        return self._wrap(operand, span)

    def _wrap(self, f, span):
        source, target = self.source, self.target
        x = source.var
        avoid = set(self.avoid) | term_free_vars(f) | _binders(source) | _binders(target) | {x}
        arg = Ident(x)
        body_cod = source.cod
        y = None
        if not self.dom.trivial:
            y = fresh_name("y", avoid)
            avoid.add(y)
            ann = source.dom
            if isinstance(ann, Base):
                ann = Base(ann.var, ann.base, conj(ann.pred, self_eq(ann.var, x, ann.base)))
            arg = Ident(y)
            if isinstance(source.dom, Base):
                body_cod = subst_type(source.cod, {x: Var(y)})
        call = App(f, arg, span=span)
        if self.cod.trivial:
            body = call
        else:
            z = fresh_name("z", avoid)
            body = Let(z, call, self.cod.apply(Ident(z), span), body_cod, span=span)
        if y is not None:
            body = Let(y, self.dom.apply(Ident(x), span), body, ann, span=span)
        return Lam(x, target.dom, body, span=span)


def consistent_subtype(env, path, source, target):
    # type: (TypeEnv, Expr, RType, RType) -> CastResult
    """
    Check `env; path |- source <~ target` and synthesize the cast.

    A base cast is accepted unless the two refinements cannot hold
    together under `env` and `path`; its predicate is `true` when
    `source <: target` is valid and the target refinement otherwise.
    Function casts compare domains contravariantly and codomains under
    the meet of both domains.

    Raises:
        `RejectedCast`: Two base refinements are disjoint. The witness
        is a value the source admits.

        `ShapeMismatch`: The two types have different simple types.
    """
    avoid = frozenset(_avoid(env, source, target))
    if isinstance(source, Base) and isinstance(target, Base):
        x, prefix, hyp, goal = _base_query(env, path, source, target)
        answer = check_validity(prefix, hyp, goal)
        if answer.valid:
            return CastResult(source, target, target.var, TRUE, avoid=avoid)
        if answer.verdict is Verdict.UNKNOWN:
            logger.debug("unknown validity, keeping the assertion: %s", print_expr(goal))
        if check_sat(prefix, conj(hyp, goal)).unsat:
            witness = check_sat(prefix, hyp).witness or answer.witness
            message = f"{print_type(source)} is incompatible with {print_type(target)}"
            if witness:
                message += f" (e.g. {print_witness(witness)})"
            raise RejectedCast(message, witness=witness)
        return CastResult(source, target, target.var, target.pred, avoid=avoid)
    if isinstance(source, Fun) and isinstance(target, Fun):
        source, target = _common_binder(env, source, target)
        dom = consistent_subtype(env, path, target.dom, source.dom)
        inner = env.extend(source.var, meet(source.dom, target.dom))
        cod = consistent_subtype(inner, path, source.cod, target.cod)
        return CastResult(source, target, source.var, dom=dom, cod=cod, avoid=avoid)
    raise ShapeMismatch(f"{print_type(source)} is not comparable with {print_type(target)}")


#******************************************************************************
#                               Scope escape
#******************************************************************************

def _strip_asserts(t):
    while isinstance(t, Assert):
        t = t.body
    return t


def _replace(e, target, repl):
    if e == target:
        return repl
    return map_children(e, lambda c: _replace(c, target, repl))


def _definition(var, ann, ty):
    """Use a singleton refinement `v = e` of `ann` to eliminate `var` from `ty`."""
    if not isinstance(ann, Base):
        return None
    own = value_of(ann.base, ann.var)
    for atom in conjuncts(ann.pred):
        if not isinstance(atom, Eq):
            continue
        for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
            if side != own or ann.var in free_vars(other) or var in free_vars(other):
                continue
            if free_vars(other) & _binders(ty):
                continue
            target = value_of(ann.base, var)
            out = map_type_preds(ty, lambda p: _replace(p, target, other))
            if var not in type_free_vars(out):
                return out
    return None


def _drop(ty, var, positive=True):
    """`ty` without the refinement conjuncts mentioning `var`, in covariant positions only."""
    if isinstance(ty, Base):
        if var not in free_vars(ty.pred):
            return ty
        if not positive:
            return None
        kept = [a for a in conjuncts(ty.pred) if var not in free_vars(a)]
        return Base(ty.var, ty.base, conj(*kept))
    dom = _drop(ty.dom, var, not positive)
    cod = _drop(ty.cod, var, positive)
    if dom is None or cod is None:
        return None
    return Fun(ty.var, dom, cod)


def abstract_binder(var, ann, rhs, ty):
    # type: (str, RType, Term, RType) -> RType | None
    """
    A type for `let var : ann = rhs in body` out of the body's type
    `ty`, free of `var`, or None when only a scope type can do it.
    Tried in order: the value of `rhs`, a singleton refinement of
    `ann`, `rhs` as an alias under assertions, dropping conjuncts.
    """
    if var not in type_free_vars(ty):
        return ty
    if isinstance(rhs, (Const, Ident, TensorVal)):
        return subst_type(ty, {var: value_expr(rhs)})
    out = _definition(var, ann, ty)
    if out is not None:
        return out
    inner = _strip_asserts(rhs)
    if isinstance(inner, (Const, Ident)):
        return subst_type(ty, {var: value_expr(inner)})
    return _drop(ty, var)


#******************************************************************************
#                               Elaboration
#******************************************************************************

def _operand_type(t, env):
    """Singleton type of an application operand or condition."""
    if isinstance(t, Const):
        return const_rtype(t.value)
    if isinstance(t, TensorVal):
        return Base("v", BaseType.TENSOR, Eq(ShapeOf(Var("v")), shape_lit(t.shape)))
    if isinstance(t, Prim):
        return t.ty
    ty = env.lookup(t.name)
    if ty is None:
        return None
    if isinstance(ty, Base):
        return self_type(t.name, ty.base, fresh_name("v", {t.name}))
    return ty


def _cond_atom(t):
    e = value_expr(t)
    if e is None:
        raise TargetTypeError("condition is not a variable or constant", t.span, rule="CT-If")
    return e


class Elaborator:
    """
    Bidirectional translation of a solved program into the target
    language. `synth` computes a type, `check` pushes an expected type
    through lets, conditionals, assertions and lambdas and casts what
    is left.
    """

    def __init__(self):
        self.inserted = []

    def _cast(self, env, path, source, target, operand, span):
        try:
            cast = consistent_subtype(env, path, source, target)
        except RejectedCast as exc:
            exc.span = exc.span or span
            raise
        except ShapeMismatch as exc:
            exc.span = exc.span or span
            raise
        if not cast.trivial:
            self.inserted.append((span, cast.preds))
        return cast

    def _bind(self, env, path, t):
        """Elaborate the right-hand side of a let against its annotation."""
        ann = t.ann
        if ann is None:
            return self.synth(env, path, t.rhs)
        return self.check(env, path, t.rhs, ann), ann

    #**************
    #*   Synth    *
    #**************

    def synth(self, env, path, t):
        # type: (TypeEnv, Expr, Term) -> tuple[Term, RType]
        if isinstance(t, (Const, TensorVal)):
            return t, _operand_type(t, env)
        if isinstance(t, Ident):
            ty = _operand_type(t, env)
            if ty is None:
                raise TargetTypeError(f"unbound variable {t.name}", t.span, rule="CI-Var")
            return t, ty
        if isinstance(t, Prim):
            return t, t.ty
        if isinstance(t, Lam):
            body, body_ty = self.synth(env.extend(t.var, t.ann), path, t.body)
            return replace(t, body=body), Fun(t.var, t.ann, body_ty)
        if isinstance(t, App):
            return self._app(env, path, t)
        if isinstance(t, Let):
            rhs, ann = self._bind(env, path, t)
            inner = env.extend(t.var, ann)
            body, body_ty = self.synth(inner, path, t.body)
            ty = abstract_binder(t.var, ann, rhs, body_ty)
            if ty is not None:
                return replace(t, rhs=rhs, body=body, ann=ann, scope=None), ty
            if t.scope is None:
                raise WfError(f"type of let body mentions {t.var}: {print_type(body_ty)}", t.span)
            body = self.check(inner, path, t.body, t.scope)
            return replace(t, rhs=rhs, body=body, ann=ann), t.scope
        if isinstance(t, Fix):
            ty = rename_binder(t.ann, t.var)
            inner = env.extend(t.fn, ty).extend(t.var, ty.dom)
            body = self.check(inner, path, t.body, ty.cod)
            return replace(t, ann=ty, body=body), ty
        if isinstance(t, If):
            if t.ann is None:
                raise TargetTypeError("conditional without a join type", t.span, rule="CI-If")
            return self._if(env, path, t, t.ann), t.ann
        if isinstance(t, Annot):
            try:
                wf_type(t.ty, dict(env.st()))
            except WfError as exc:
                exc.span = exc.span or t.span
                raise
            return self.check(env, path, t.term, t.ty), t.ty
        if isinstance(t, Assert):
            body, ty = self.synth(env, conj(path, t.pred), t.body)
            return replace(t, body=body), ty
        raise TypeError(f"unexpected term {t!r}")

    def _app(self, env, path, t):
        fn, fn_ty = self.synth(env, path, t.fn)
        if not isinstance(fn_ty, Fun):
            raise ShapeMismatch(f"applying a value of type {print_type(fn_ty)}", t.span)
        arg_ty = _operand_type(t.arg, env)
        if arg_ty is None:
            raise TargetTypeError(f"unbound variable {t.arg.name}", t.arg.span, rule="CI-App")
        span = t.arg.span or t.span
        cast = self._cast(env, path, arg_ty, fn_ty.dom, t.arg, span)
        result = fn_ty.cod
        if isinstance(fn_ty.dom, Base):
            result = subst_type(result, {fn_ty.var: value_expr(t.arg)})
        if cast.trivial:
            return replace(t, fn=fn), result
        if isinstance(fn_ty.dom, Base):
            pred = subst_expr(cast.pred, {cast.var: value_expr(t.arg)})
            return Assert(pred, replace(t, fn=fn), span=span), result
        base = "f" if isinstance(t.arg, Prim) else t.arg.name
        name = fresh_name(base, env.names() | term_free_vars(t) | _binders(fn_ty))
        call = replace(t, fn=fn, arg=Ident(name, span=t.arg.span))
        return Let(name, cast.apply(t.arg, span), call, fn_ty.dom, span=span), result

    def _if(self, env, path, t, ty):
        atom = _cond_atom(t.cond)
        then = self.check(env, conj(path, atom), t.then, ty)
        else_ = self.check(env, conj(path, Not(atom)), t.else_, ty)
        return replace(t, then=then, else_=else_, ann=ty)

    #**************
    #*   Check    *
    #**************

    def check(self, env, path, t, ty):
        # type: (TypeEnv, Expr, Term, RType) -> Term
        """`t` elaborated so that it has type `ty`."""
        if isinstance(t, Let):
            rhs, ann = self._bind(env, path, t)
            body = self.check(env.extend(t.var, ann), path, t.body, ty)
            return replace(t, rhs=rhs, body=body, ann=ann, scope=None)
        if isinstance(t, If):
            return self._if(env, path, t, ty)
        if isinstance(t, Assert):
            return replace(t, body=self.check(env, conj(path, t.pred), t.body, ty))
        if isinstance(t, Annot):
            inner = self.check(env, path, t.term, t.ty)
            return self._coerce(env, path, inner, t.ty, ty, t.span)
        if isinstance(t, Lam) and isinstance(ty, Fun):
            target = rename_binder(ty, t.var) if t.var not in type_free_vars(ty) else None
            if target is not None and subtype(env, path, target.dom, t.ann) is Verdict.VALID:
                body = self.check(env.extend(t.var, target.dom), path, t.body, target.cod)
                return replace(t, body=body)
        out, out_ty = self.synth(env, path, t)
        return self._coerce(env, path, out, out_ty, ty, t.span)

    def _coerce(self, env, path, t, source, target, span):
        cast = self._cast(env, path, source, target, t, span)
        if cast.trivial:
            return t
        operand = value_expr(t)
        if operand is not None:
            return cast.apply(t, span)
        name = fresh_name("r", env.names() | term_free_vars(t) | _binders(source) | _binders(target))
        body = cast.apply(Ident(name, span=span), span)
        return Let(name, t, body, source, span=span)


@dataclass
class Elaboration:
    """
    Result of phase 3.

    `asserts` lists the span and predicates of every inserted cast that
    was not proved statically.
    """
    program: Program
    types: dict
    asserts: list = field(default_factory=list)


def elaborate(program, types=None):
    # type: (Program, Mapping[str, RType]) -> Elaboration
    """
    Translate a solved program into the target language.

    Args:
        `program`: Output of inference, every annotation solved.

        `types` (optional): Type each top-level binding is checked
        against; bindings without one are synthesized.

    Raises:
        `RejectedCast`: A cast between disjoint refinements.

        `WfError`: A binder escapes the type of its let.
    """
    types = types or {}
    elaborator = Elaborator()
    env = TypeEnv()
    bindings, out_types = [], {}
    for binding in program.bindings:
        expected = None if binding.is_main else types.get(binding.name)
        if expected is not None:
            term, ty = elaborator.check(env, TRUE, binding.term, expected), expected
        else:
            term, ty = elaborator.synth(env, TRUE, binding.term)
        bindings.append(TopBinding(binding.name, term, binding.span, binding.is_main))
        out_types[binding.name] = ty
        env = env.extend(binding.name, ty)
    return Elaboration(Program(bindings, program.stubs), out_types, elaborator.inserted)


#******************************************************************************
#                             Assert erasure
#******************************************************************************

def _bind_env(env, name, ann, rhs):
    if ann is not None:
        return env.extend(name, ann)
    stype = getattr(rhs, "stype", None)
    base = getattr(stype, "base", None)
    if isinstance(base, BaseType):
        return env.extend(name, Base("v", base, TRUE))
    return env


def erase_trivial_asserts(t, env=None, path=TRUE):
    # type: (Term, TypeEnv, Expr) -> Term
    """
    `t` without the assertions whose predicate is `true` or provable
    from the refinements in scope and the path condition.
    """
    env = env if env is not None else TypeEnv()
    if isinstance(t, Assert):
        pred = simplify(t.pred)
        body_path = conj(path, pred)
        if pred == TRUE or _provable(env, path, pred):
            return erase_trivial_asserts(t.body, env, path)
        return replace(t, body=erase_trivial_asserts(t.body, env, body_path))
    if isinstance(t, Lam):
        return replace(t, body=erase_trivial_asserts(t.body, _bind_env(env, t.var, t.ann, None), path))
    if isinstance(t, Fix):
        inner = env.extend(t.fn, t.ann) if t.ann is not None else env
        dom = t.ann.dom if isinstance(t.ann, Fun) else None
        inner = _bind_env(inner, t.var, dom, None)
        return replace(t, body=erase_trivial_asserts(t.body, inner, path))
    if isinstance(t, Let):
        rhs = erase_trivial_asserts(t.rhs, env, path)
        inner = _bind_env(env, t.var, t.ann, t.rhs)
        return replace(t, rhs=rhs, body=erase_trivial_asserts(t.body, inner, path))
    if isinstance(t, If):
        atom = value_expr(t.cond)
        then_path = conj(path, atom) if atom is not None else path
        else_path = conj(path, Not(atom)) if atom is not None else path
        return replace(t, then=erase_trivial_asserts(t.then, env, then_path),
                       else_=erase_trivial_asserts(t.else_, env, else_path))
    if isinstance(t, App):
        return replace(t, fn=erase_trivial_asserts(t.fn, env, path))
    if isinstance(t, Annot):
        return replace(t, term=erase_trivial_asserts(t.term, env, path))
    return t


def _provable(env, path, pred):
    try:
        return check_validity(env.st(), conj(env.refine(), path), pred, search=False).valid
    except WfError:
        return False


def erase_program(program):
    # type: (Program) -> Program
    env, bindings = TypeEnv(), []
    for binding in program.bindings:
        bindings.append(replace(binding, term=erase_trivial_asserts(binding.term, env)))
    return Program(bindings, program.stubs)


#******************************************************************************
#                             Target checking
#******************************************************************************

class TargetChecker:
    """
    Algorithmic typing of target terms. Subtyping is demanded (VALID)
    at let annotations, application arguments, conditional joins and
    wherever a term is checked against a type; assertions add their
    predicate to the path condition.
    """

    def _sub(self, env, path, left, right, span, rule):
        try:
            verdict = subtype(env, path, left, right)
        except (ShapeMismatch, WfError) as exc:
            raise TargetTypeError(exc.message, span, rule=rule) from exc
        if verdict is not Verdict.VALID:
            raise TargetTypeError(
                f"{print_type(left)} is not a subtype of {print_type(right)} ({verdict.value})",
                span, rule=rule)

    def synth(self, env, path, t):
        # type: (TypeEnv, Expr, Term) -> RType
        if isinstance(t, (Const, TensorVal, Ident)):
            ty = _operand_type(t, env)
            if ty is None:
                raise TargetTypeError(f"unbound variable {t.name}", t.span, rule="CT-Var")
            return ty
        if isinstance(t, Prim):
            if t.ty is None:
                raise TargetTypeError(f"primitive {t.name} without a type", t.span, rule="CT-Const")
            return t.ty
        if isinstance(t, PrimVal):
            ty = t.ty
            for arg in t.args:
                ty = self._apply(env, path, ty, arg, t.span)
            return ty
        if isinstance(t, Lam):
            if t.ann is None:
                raise TargetTypeError(f"unannotated binder {t.var}", t.span, rule="CT-Abs")
            return Fun(t.var, t.ann, self.synth(env.extend(t.var, t.ann), path, t.body))
        if isinstance(t, App):
            return self._apply(env, path, self.synth(env, path, t.fn), t.arg, t.span)
        if isinstance(t, Let):
            ann = self._bound(env, path, t)
            inner = env.extend(t.var, ann)
            if t.scope is not None:
                self.check(inner, path, t.body, t.scope)
                return t.scope
            body_ty = self.synth(inner, path, t.body)
            ty = abstract_binder(t.var, ann, t.rhs, body_ty)
            if ty is None:
                raise TargetTypeError(f"{t.var} escapes its scope in {print_type(body_ty)}",
                                      t.span, rule="CT-Let")
            return ty
        if isinstance(t, Fix):
            if not isinstance(t.ann, Fun):
                raise TargetTypeError(f"unannotated recursive binder {t.fn}", t.span, rule="CT-Fix")
            ty = rename_binder(t.ann, t.var)
            self.check(env.extend(t.fn, ty).extend(t.var, ty.dom), path, t.body, ty.cod)
            return ty
        if isinstance(t, If):
            if t.ann is None:
                raise TargetTypeError("conditional without a join type", t.span, rule="CT-If")
            self.check(env, path, t, t.ann)
            return t.ann
        if isinstance(t, Annot):
            self.check(env, path, t.term, t.ty)
            return t.ty
        if isinstance(t, Assert):
            return self.synth(env, conj(path, t.pred), t.body)
        raise TargetTypeError(f"unexpected term {t!r}", getattr(t, "span", None))

    def _bound(self, env, path, t):
        if t.ann is None:
            return self.synth(env, path, t.rhs)
        self.check(env, path, t.rhs, t.ann)
        return t.ann

    def _apply(self, env, path, fn_ty, arg, span):
        if not isinstance(fn_ty, Fun):
            raise TargetTypeError(f"applying a value of type {print_type(fn_ty)}", span, rule="CT-App")
        arg_ty = self.synth(env, path, arg)
        self._sub(env, path, arg_ty, fn_ty.dom, getattr(arg, "span", None) or span, "CT-App")
        if isinstance(fn_ty.dom, Base):
            e = value_expr(arg)
            if e is None:
                raise TargetTypeError("argument is not a variable or constant", span, rule="CT-App")
            return subst_type(fn_ty.cod, {fn_ty.var: e})
        return fn_ty.cod

    def check(self, env, path, t, ty):
        # type: (TypeEnv, Expr, Term, RType) -> None
        if isinstance(t, Assert):
            return self.check(env, conj(path, t.pred), t.body, ty)
        if isinstance(t, Let):
            ann = self._bound(env, path, t)
            return self.check(env.extend(t.var, ann), path, t.body, ty)
        if isinstance(t, If):
            atom = _cond_atom(t.cond)
            if t.ann is not None and t.ann != ty:
                self._sub(env, path, t.ann, ty, t.span, "CT-If")
                ty = t.ann
            self.check(env, conj(path, atom), t.then, ty)
            self.check(env, conj(path, Not(atom)), t.else_, ty)
            return None
        if isinstance(t, Lam) and isinstance(ty, Fun) and t.ann is not None:
            if t.var not in type_free_vars(ty):
                target = rename_binder(ty, t.var)
                self._sub(env, path, target.dom, t.ann, t.span, "CT-Abs")
                return self.check(env.extend(t.var, target.dom), path, t.body, target.cod)
        self._sub(env, path, self.synth(env, path, t), ty, t.span, "CT-Sub")
        return None


def check_target(program, types=None):
    # type: (Program, Mapping[str, RType]) -> dict
    """
    Type-check a target program, each binding against `types` when
    given, and return the type of every top-level binding.

    Raises:
        `TargetTypeError`: With the name of the failing rule.
    """
    types = types or {}
    checker = TargetChecker()
    env, out = TypeEnv(), {}
    for binding in program.bindings:
        expected = types.get(binding.name)
        if expected is not None:
            checker.check(env, TRUE, binding.term, expected)
            ty = expected
        else:
            ty = checker.synth(env, TRUE, binding.term)
        out[binding.name] = ty
        env = env.extend(binding.name, ty)
    return out
