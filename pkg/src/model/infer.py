"""Inference module.

Best-effort refinement inference. The simply-typed program is walked
with template types whose unknown refinements are predicate variables;
every subtyping obligation met on the way is decomposed into Horn
clauses `ctx /\\ lhs => rhs`, which a heuristic solver turns into a
solution for the predicate variables. Solving happens at every `let`,
so later code sees the solved type of each binding. Predicate variables
the solver cannot determine become `true`.
"""
import logging
from dataclasses import dataclass, field, replace
from itertools import count

from model.ast import (
    Annot, App, Assert, Base, BaseType, Const, Eq, Fix, Fun, Ident, If, Lam, Let,
    Not, PredApp, PredVar, Prim, Term, TypeEnv, Var, BoolConst, Num, TRUE,
    conj, conjuncts, free_vars, has_pred_app, map_children, map_type_preds,
    pred_vars, rename_binder, self_type, shape_lit, subst_expr, subst_type,
    type_free_vars, value_expr,
)
from model.errors import ShapeMismatch, UnboundVariable, WfError
from model.logic import simplify
from model.parser import Program, TopBinding
from model.poly import TypeScheme, instantiate_refpoly_stub
from model.printer import print_expr, print_type
from model.simpletypes import TArrow, TBase
from model.sorts import infer_sorts, wf_pred, wf_type
from model.tools.engine import Prover
from model import solver
from utils.fresh import fresh_name

logger = logging.getLogger(__name__)

_APPLY_DEPTH = 64


#******************************************************************************
#                         Predicate variables
#******************************************************************************

class PredVarSupply:
    """
    Factory of predicate variables, numbered in creation order.
    """

    def __init__(self):
        self._next = 0
        self.created = []

    def __call__(self, inputs, n_deps, origin=None):
        # type: (tuple, int, int) -> PredVar
        pv = PredVar(self._next, tuple(inputs), n_deps, self._next if origin is None else origin)
        self._next += 1
        self.created.append(pv)
        return pv

    def mark(self):
        """Id of the next variable; variables with `origin >= mark` are newer."""
        return self._next


def make_template(st, deps, supply):
    # type: (TBase | TArrow, tuple, PredVarSupply) -> RType
    """
    Template refinement type of simple type `st`.

    Base positions get a fresh predicate variable over `deps` and the
    refinement binder; function types extend `deps` with their
    base-typed binder for the codomain.
    """
    names = {n for n, _ in deps}
    if isinstance(st, TBase):
        binder = fresh_name("v", names)
        pv = supply(tuple(deps) + ((binder, st.base),), len(deps))
        return Base(binder, st.base, PredApp(pv, tuple(Var(n) for n in pv.formals)))
    if isinstance(st, TArrow):
        x = fresh_name("x", names)
        dom = make_template(st.dom, deps, supply)
        inner = tuple(deps) + ((x, dom.base),) if isinstance(dom, Base) else tuple(deps)
        return Fun(x, dom, make_template(st.cod, inner, supply))
    raise TypeError(f"not a ground simple type: {st}")


#******************************************************************************
#                               Solutions
#******************************************************************************

class Solution:
    """
    Map θ from predicate variables to predicates over their formals.
    Solutions may mention other predicate variables; `apply` substitutes
    to a fixpoint.
    """

    def __init__(self):
        self.map = {}
        self.defaulted = set()

    def __contains__(self, pv):
        return pv in self.map

    def __len__(self):
        return len(self.map)

    def assign(self, pv, pred):
        logger.debug("%s := %s", pv.name, print_expr(pred))
        self.map[pv] = pred

    def apply(self, e):
        # type: (Expr) -> Expr
        if not self.map or not has_pred_app(e):
            return e
        for _ in range(_APPLY_DEPTH):
            new = self._step(e)
            if new == e:
                break
            e = new
        return simplify(e)

    def _step(self, e):
        if isinstance(e, PredApp):
            body = self.map.get(e.var)
            if body is None:
                return e
            return subst_expr(body, dict(zip(e.var.formals, e.args)))
        if isinstance(e, (Var, Num, BoolConst)):
            return e
        return map_children(e, self._step)

    def apply_type(self, t):
        return map_type_preds(t, self.apply) if t is not None else None

    def apply_clauses(self, clauses):
        return [c.map(self.apply) for c in clauses]

    def root(self, pv):
        # type: (PredVar) -> PredVar | None
        """
        Follow solutions of the form `q(..., binder)` from `pv` to the
        defaulted (or unsolved) variable at the end, or None when the
        chain ends in a real refinement.
        """
        seen = set()
        while pv in self.map and pv not in self.defaulted:
            if pv in seen:
                return None
            seen.add(pv)
            body = self.map[pv]
            if not isinstance(body, PredApp) or not body.args:
                return None
            if body.args[-1] != Var(pv.formals[-1]):
                return None
            pv = body.var
        return pv

    def lines(self):
        out = []
        for pv in sorted(self.map, key=lambda p: p.id):
            head = f"{pv.name}({', '.join(pv.formals)})"
            tag = "  (default)" if pv in self.defaulted else ""
            out.append(f"{head} := {print_expr(self.map[pv])}{tag}")
        return out


def default_unsolved(solution, predvars):
    # type: (Solution, Iterable[PredVar]) -> Solution
    """Map every variable of `predvars` without a solution to `true`."""
    for pv in predvars:
        if pv not in solution:
            solution.map[pv] = TRUE
            solution.defaulted.add(pv)
    return solution


#******************************************************************************
#                          Constraints and clauses
#******************************************************************************

@dataclass(frozen=True)
class Constraint:
    """`env; path |- left <~ right`, recorded where it arises."""
    env: TypeEnv
    path: tuple
    left: object
    right: object
    span: object = None


@dataclass(frozen=True)
class Clause:
    """
    Horn clause `ctx /\\ left => right` over the variables of `prefix`.

    Args:
        `ctx`: Refinements of the environment and the path condition.

        `left`: Refinement of the subtype.

        `right`: Refinement of the supertype.

        `prefix`: `(name, BaseType)` pairs in binding order.

        `order`: Creation order, used to iterate deterministically.
    """
    ctx: tuple
    left: tuple
    right: tuple
    prefix: tuple
    order: int
    span: object = field(default=None, compare=False)

    def map(self, fn):
        return replace(self, ctx=_atoms(fn(a) for a in self.ctx),
                       left=_atoms(fn(a) for a in self.left),
                       right=_atoms(fn(a) for a in self.right))

    def pred_vars(self):
        out = set()
        for a in self.ctx + self.left + self.right:
            out |= pred_vars(a)
        return out

    def __str__(self):
        def show(atoms):
            return " && ".join(print_expr(a) for a in atoms) if atoms else "true"
        return f"{show(self.ctx)} |- {show(self.left)} => {show(self.right)}"


def _atoms(preds):
    out = []
    for p in preds:
        for a in conjuncts(p):
            if a not in out:
                out.append(a)
    return tuple(out)


def decompose_to_chc(constraints, orders=None):
    # type: (Iterable[Constraint], Iterator[int]) -> list[Clause]
    """
    Horn clauses of subtyping constraints: one clause per pair of base
    positions, domains compared contravariantly and codomains under the
    environment extended with the right-hand domain.

    Raises:
        `ShapeMismatch`: The two sides have different simple types.
    """
    orders = orders if orders is not None else count()
    out = []
    for c in constraints:
        _decompose(c.env, tuple(c.path), c.left, c.right, c.span, orders, out)
    return out


def _decompose(env, path, left, right, span, orders, out):
    if isinstance(left, Base) and isinstance(right, Base):
        if left.base is not right.base:
            raise ShapeMismatch(f"{print_type(left)} is not comparable with {print_type(right)}", span)
        avoid = env.names() | type_free_vars(left) | type_free_vars(right)
        for p in path:
            avoid |= free_vars(p)
        binder = fresh_name(right.var, avoid)
        lhs = subst_expr(left.pred, {left.var: Var(binder)})
        rhs = subst_expr(right.pred, {right.var: Var(binder)})
        ctx = _atoms((env.refine(),) + tuple(path))
        out.append(Clause(ctx, _atoms((lhs,)), _atoms((rhs,)),
                          env.st() + ((binder, right.base),), next(orders), span))
        return
    if isinstance(left, Fun) and isinstance(right, Fun):
        avoid = env.names() | type_free_vars(left) | type_free_vars(right)
        if right.var in avoid:
            right = rename_binder(right, fresh_name(right.var, avoid))
        _decompose(env, path, right.dom, left.dom, span, orders, out)
        cod = subst_type(left.cod, {left.var: Var(right.var)}) if left.var != right.var else left.cod
        _decompose(env.extend(right.var, right.dom), path, cod, right.cod, span, orders, out)
        return
    raise ShapeMismatch(f"{print_type(left)} is not comparable with {print_type(right)}", span)


def simplify_clauses(clauses):
    # type: (Iterable[Clause]) -> list[Clause]
    """
    Drop right-hand atoms that follow from the clause's context and
    left-hand side, then clauses with nothing left to prove (or with
    contradictory hypotheses). Right-hand atoms are rewritten with the
    equations of the hypotheses, left-hand atoms with those of the
    context.
    """
    out, seen = [], set()
    for c in clauses:
        c = _simplify_clause(c)
        if c is None:
            continue
        key = (c.ctx, c.left, c.right)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def _simplify_clause(c):
    sorts = infer_sorts(c.ctx + c.left + c.right, dict(c.prefix))
    order = [name for name, _ in c.prefix]
    prover = Prover(c.ctx, sorts, order, solver.options.rounds, skolemize=False)
    if prover.inconsistent:
        return None
    # temporaries defined in the context are rewritten out of the left side
    left = _atoms(prover.normalize(a) for a in c.left)
    prover.assume(*left)
    if prover.inconsistent:
        return None
    full = Prover(c.ctx + left, sorts, order, solver.options.rounds)
    if full.inconsistent:
        return None
    right = []
    for atom in c.right:
        for a in conjuncts(prover.normalize(atom)):
            if a not in right and not (prover.proves(a) or full.proves(a)):
                right.append(a)
    if not right:
        return None
    return replace(c, left=left, right=tuple(right))


#******************************************************************************
#                                 Solving
#******************************************************************************

def _restrict(atoms, app):
    """
    Conjunction of the non-ground `atoms` whose variables are all
    arguments of `app`, renamed to `app`'s formals.
    """
    mapping = {}
    for formal, arg in zip(app.var.formals, app.args):
        if isinstance(arg, Var) and arg.name not in mapping:
            mapping[arg.name] = Var(formal)
    keep = []
    for a in atoms:
        fv = free_vars(a)
        if fv and fv <= set(mapping):
            keep.append(subst_expr(a, mapping))
    return conj(*keep)


def _lonely_rhs(c, clauses, solution):
    """The predicate application `c` alone solves for, if any."""
    if len(c.right) != 1 or not isinstance(c.right[0], PredApp):
        return None
    app = c.right[0]
    pv = app.var
    if pv in solution:
        return None
    for other in clauses:
        if other.order != c.order and any(pv in pred_vars(a) for a in other.right):
            return None
    return app


def _left_apps(c):
    """Predicate applications of the left-hand side, then of the context."""
    out = []
    for a in c.left + c.ctx:
        if isinstance(a, PredApp) and a not in out:
            out.append(a)
    return out


def _pass_a(clauses, solution):
    for order in [c.order for c in clauses]:
        c = next((x for x in clauses if x.order == order), None)
        if c is None:
            continue
        app = _lonely_rhs(c, clauses, solution)
        if app is None:
            continue
        own = [a for a in c.left if app.var not in pred_vars(a)]
        solution.assign(app.var, _restrict(own, app))
        clauses = simplify_clauses(solution.apply_clauses(clauses))
    return clauses


def _pass_b(clauses, solution, supply):
    for order in [c.order for c in clauses]:
        c = next((x for x in clauses if x.order == order), None)
        if c is None:
            continue
        plain = [a for a in c.right if not has_pred_app(a)]
        for app in _left_apps(c):
            if app.var in solution:
                continue
            pred = _restrict(plain, app)
            if pred == TRUE:
                continue
            pv = app.var
            rest = supply(pv.inputs, pv.n_deps, origin=pv.origin)
            solution.assign(pv, conj(pred, PredApp(rest, tuple(Var(f) for f in pv.formals))))
            clauses = simplify_clauses(solution.apply_clauses(clauses))
            break
    return clauses


def solve(clauses, solution, supply):
    # type: (list[Clause], Solution, PredVarSupply) -> list[Clause]
    """
    Run the two-pass heuristic on `clauses`, extending `solution`, and
    return the clauses left standing.

    Pass A solves a predicate variable that is the whole right-hand side
    of exactly one clause by the part of that clause's left-hand side it
    can see. Pass B strengthens a predicate variable of a left-hand side
    with the part of the right-hand side it can see, conjoined with a
    fresh variable. The loop stops when no clause is left or nothing
    changes, or when its fuel runs out.
    """
    clauses = simplify_clauses(solution.apply_clauses(clauses))
    initial = set()
    for c in clauses:
        initial |= c.pred_vars()
    fuel = len(clauses) * max(1, len(initial)) + 8
    while clauses:
        if fuel == 0:
            logger.warning("clause solver stopped by its fuel cap with %d clause(s) left", len(clauses))
            break
        fuel -= 1
        before = clauses
        clauses = _pass_a(clauses, solution)
        clauses = _pass_b(clauses, solution, supply)
        if clauses == before:
            break
    return clauses


def solve_clauses(clauses, supply=None, solution=None):
    # type: (list[Clause], PredVarSupply, Solution) -> Solution
    """Solution of `clauses` by the two-pass heuristic, not defaulted."""
    solution = solution if solution is not None else Solution()
    supply = supply if supply is not None else PredVarSupply()
    solve(list(clauses), solution, supply)
    return solution


#******************************************************************************
#                               Inference
#******************************************************************************

def const_rtype(value):
    # type: (int | bool | tuple) -> Base
    """Singleton type of a constant."""
    if isinstance(value, bool):
        return Base("v", BaseType.BOOL, Eq(Var("v"), BoolConst(value)))
    if isinstance(value, int):
        return Base("v", BaseType.INT, Eq(Var("v"), Num(value)))
    return Base("v", BaseType.INT_LIST, Eq(Var("v"), shape_lit(value)))


def operand_expr(t):
    """The logic expression for an application operand (a variable or a constant)."""
    e = value_expr(t)
    if e is None:
        raise TypeError(f"not an operand: {t!r}")
    return e


@dataclass
class Inference:
    """
    Result of phase 2.

    Args:
        `annotated`: The simply-typed input program, whose node
        identities key `arg_types`.

        `program`: The program with every binder, let, join and
        primitive annotated with its solved type.

        `types`: Solved type of every top-level binding.

        `raw_types`: Type of every top-level binding before solving.

        `solution`: Final solution, defaulted.

        `clauses`: Every clause generated, before solving.

        `residual`: Clauses the solver left standing; they are checked
        again when casts are inserted.

        `arg_types`: Raw type of the operand of every application.
    """
    annotated: Program
    program: Program
    types: dict
    raw_types: dict
    solution: Solution
    clauses: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    arg_types: dict = field(default_factory=dict)

    def chc_report(self):
        # type: () -> str
        """Clauses and solution in the `--dump-chc` format."""
        lines = ["# clauses"]
        lines += [str(c) for c in self.clauses]
        lines.append("# solution")
        lines += self.solution.lines()
        lines.append("# residual")
        lines += [str(c) for c in self.residual]
        return "\n".join(lines) + "\n"


class Inferencer:
    """
    Template walk over one program.

    Args:
        `stubs`: Stub name to `RType` or `TypeScheme`.
    """

    def __init__(self, stubs):
        self.stubs = dict(stubs)
        self.supply = PredVarSupply()
        self.solution = Solution()
        self.constraints = []
        self.pending = []
        self.history = []
        self.residual = []
        self.arg_types = {}
        self._orders = count()

    def template(self, st, env):
        return make_template(st, env.st(), self.supply)

    #**************
    #*  Clauses   *
    #**************

    def constrain(self, env, path, left, right, span=None):
        constraint = Constraint(env, tuple(path), left, right, span)
        self.constraints.append(constraint)
        clauses = decompose_to_chc([constraint], self._orders)
        self.history += clauses
        self.pending += clauses

    def solve(self, mark=None):
        """
        Solve the pending clauses and default the predicate variables
        created since `mark` (all of them when `mark` is None).
        """
        pending = solve(self.pending, self.solution, self.supply)
        fresh = [pv for pv in self.supply.created if mark is None or pv.origin >= mark]
        default_unsolved(self.solution, fresh)
        pending = simplify_clauses(self.solution.apply_clauses(pending))
        self.pending = [c for c in pending if c.pred_vars()]
        self.residual += [c for c in pending if not c.pred_vars()]

    #**************
    #*    Walk    *
    #**************

    def walk(self, t, env, path):
        # type: (Term, TypeEnv, tuple) -> tuple[RType, Term]
        """Type of `t` under `env` and `path`, and `t` with annotations filled in."""
        if isinstance(t, Const):
            return const_rtype(t.value), t
        if isinstance(t, Ident):
            return self._ident(t, env)
        if isinstance(t, App):
            return self._app(t, env, path)
        if isinstance(t, Lam):
            if t.ann is not None:
                self._wf(t.ann, env, t.span)
            dom = t.ann if t.ann is not None else self.template(t.stype.dom, env)
            body_ty, body = self.walk(t.body, env.extend(t.var, dom), path)
            return Fun(t.var, dom, body_ty), replace(t, ann=dom, body=body)
        if isinstance(t, Let):
            return self._let(t, env, path)
        if isinstance(t, Fix):
            if t.ann is not None:
                self._wf(t.ann, env, t.span)
            ty = t.ann if t.ann is not None else self.template(t.stype, env)
            ty = rename_binder(ty, t.var)
            inner = env.extend(t.fn, ty).extend(t.var, ty.dom)
            body_ty, body = self.walk(t.body, inner, path)
            self.constrain(inner, path, body_ty, ty.cod, t.span)
            return ty, replace(t, ann=ty, body=body)
        if isinstance(t, If):
            return self._if(t, env, path)
        if isinstance(t, Annot):
            self._wf(t.ty, env, t.span)
            inner_ty, inner = self.walk(t.term, env, path)
            self.constrain(env, path, inner_ty, t.ty, t.span)
            return t.ty, replace(t, term=inner)
        if isinstance(t, Assert):
            try:
                wf_pred(t.pred, dict(env.st()))
            except WfError as exc:
                exc.span = exc.span or t.span
                raise
            ty, body = self.walk(t.body, env, path + (t.pred,))
            return ty, replace(t, body=body)
        raise TypeError(f"unexpected term {t!r}")

    def _wf(self, ty, env, span):
        try:
            wf_type(ty, dict(env.st()))
        except WfError as exc:
            exc.span = exc.span or span
            raise

    def _ident(self, t, env):
        ty = env.lookup(t.name)
        if ty is None:
            return self._stub(t, env)
        if isinstance(ty, Base):
            return self_type(t.name, ty.base, fresh_name("v", {t.name})), t
        return ty, t

    def _stub(self, t, env):
        scheme = self.stubs.get(t.name)
        if scheme is None:
            raise UnboundVariable(t.name, t.span)
        if isinstance(scheme, TypeScheme):
            ty = instantiate_refpoly_stub(scheme, env.st(), self.supply)
        else:
            ty = scheme
        return ty, Prim(t.name, ty, span=t.span, stype=t.stype)

    def _operand(self, t, env):
        """Type of an application operand: the declared type of a variable, not its singleton."""
        if isinstance(t, Const):
            return const_rtype(t.value), t
        ty = env.lookup(t.name)
        if isinstance(ty, Base):
            return ty, t
        return self._ident(t, env)

    def _app(self, t, env, path):
        fn_ty, fn = self.walk(t.fn, env, path)
        arg_ty, arg = self._operand(t.arg, env)
        if not isinstance(fn_ty, Fun):
            raise ShapeMismatch(f"applying a value of type {print_type(fn_ty)}", t.span)
        self.arg_types[id(t)] = arg_ty
        self.constrain(env, path, arg_ty, fn_ty.dom, t.arg.span or t.span)
        result = fn_ty.cod
        if isinstance(fn_ty.dom, Base):
            result = subst_type(result, {fn_ty.var: operand_expr(t.arg)})
        return result, replace(t, fn=fn, arg=arg)

    def _let(self, t, env, path):
        mark = self.supply.mark()
        rhs_ty, rhs = self.walk(t.rhs, env, path)
        if t.ann is not None:
            self._wf(t.ann, env, t.span)
            self.constrain(env, path, rhs_ty, t.ann, t.span)
            rhs_ty = t.ann
        self.solve(mark)
        rhs_ty = self.solution.apply_type(rhs_ty)
        logger.debug("let %s : %s", t.var, print_type(rhs_ty))
        inner = env.extend(t.var, rhs_ty)
        body_ty, body = self.walk(t.body, inner, path)
        scope = None
        if t.var in type_free_vars(body_ty):
            if isinstance(t.rhs, (Const, Ident)):
                body_ty = subst_type(body_ty, {t.var: operand_expr(t.rhs)})
            else:
                scope = self.template(t.stype, env)
                self.constrain(inner, path, body_ty, scope, t.span)
                body_ty = scope
        return body_ty, replace(t, rhs=rhs, body=body, ann=rhs_ty, scope=scope)

    def _if(self, t, env, path):
        cond_ty, cond = self.walk(t.cond, env, path)
        test = operand_expr(t.cond)
        join = self.template(t.stype, env)
        then_path, else_path = path + (test,), path + (Not(test),)
        then_ty, then = self.walk(t.then, env, then_path)
        self.constrain(env, then_path, then_ty, join, t.then.span or t.span)
        else_ty, else_ = self.walk(t.else_, env, else_path)
        self.constrain(env, else_path, else_ty, join, t.else_.span or t.span)
        return join, replace(t, cond=cond, then=then, else_=else_, ann=join)

    #**************
    #*   Output   *
    #**************

    def finish(self, t):
        # type: (Term) -> Term
        """`t` with the final solution applied to every annotation."""
        ty = self.solution.apply_type
        if isinstance(t, Lam):
            return replace(t, ann=ty(t.ann), body=self.finish(t.body))
        if isinstance(t, App):
            return replace(t, fn=self.finish(t.fn), arg=self.finish(t.arg))
        if isinstance(t, Let):
            return replace(t, rhs=self.finish(t.rhs), body=self.finish(t.body),
                           ann=ty(t.ann), scope=ty(t.scope))
        if isinstance(t, Fix):
            return replace(t, ann=ty(t.ann), body=self.finish(t.body))
        if isinstance(t, If):
            return replace(t, then=self.finish(t.then), else_=self.finish(t.else_), ann=ty(t.ann))
        if isinstance(t, Annot):
            return replace(t, term=self.finish(t.term))
        if isinstance(t, Assert):
            return replace(t, body=self.finish(t.body))
        if isinstance(t, Prim):
            return replace(t, ty=ty(t.ty))
        return t


def collect_constraints(program, stubs):
    # type: (Program, Mapping) -> tuple[list[Term], list[Constraint]]
    """
    Walk `program` with templates, without solving, and return the
    annotated skeletons of its bindings and every constraint met.
    """
    inferencer = Inferencer(stubs)
    env, terms = TypeEnv(), []
    for binding in program.bindings:
        ty, term = inferencer.walk(binding.term, env, ())
        env = env.extend(binding.name, ty)
        terms.append(term)
    return terms, inferencer.constraints


def infer_program(program, stubs):
    # type: (Program, Mapping) -> Inference
    """
    Phase 2 over a simply-typed program: walk every top-level binding,
    solving at each let and after each binding, and apply the final
    solution.

    Raises:
        `WfError`: An annotation is ill-sorted or out of scope.

        `ShapeMismatch`: A constraint relates types of different shapes.
    """
    inferencer = Inferencer(stubs)
    env = TypeEnv()
    raw, skeletons = {}, []
    for binding in program.bindings:
        mark = inferencer.supply.mark()
        ty, term = inferencer.walk(binding.term, env, ())
        raw[binding.name] = ty
        inferencer.solve(mark)
        env = env.extend(binding.name, inferencer.solution.apply_type(ty))
        skeletons.append(term)
    inferencer.solve(None)
    solution = inferencer.solution
    bindings = [TopBinding(b.name, inferencer.finish(term), b.span, b.is_main)
                for b, term in zip(program.bindings, skeletons)]
    types = {name: solution.apply_type(ty) for name, ty in raw.items()}
    return Inference(
        annotated=program,
        program=Program(bindings, program.stubs),
        types=types,
        raw_types=raw,
        solution=solution,
        clauses=inferencer.history,
        residual=inferencer.residual,
        constraints=inferencer.constraints,
        arg_types=inferencer.arg_types,
    )
