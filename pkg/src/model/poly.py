"""Polymorphism module.

Type schemes for stubs and let bindings.

- Refinement-polymorphic stubs (`forall b1:bool b2:bool.`) are
  instantiated with fresh predicate variables at every use.
- Shape-polymorphic stubs (`forall S1 S2.`) are weakened: refinements
  mentioning a shape parameter are dropped.
- Top-level functions whose inferred type leaves the same unknown
  tensor shape at several positions are split into a polymorphic
  variant taking the shapes as explicit arguments and a monomorphic
  fallback. Each call site picks one of them.
"""
import logging
from dataclasses import dataclass, field, replace

from model.ast import (
    App, Base, BaseType, Const, Eq, Fun, Ident, Lam, Let, Fix, If, Annot, Assert,
    PredApp, ShapeList, ShapeOf, Num, Var, TRUE, conj, conjuncts, free_vars,
    map_type_preds, rename_binder, subst_expr, subst_type, type_free_vars,
)
from model.errors import InferenceFailed
from model.logic import simplify
from model.parser import Program, TopBinding
from utils.fresh import fresh_name

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TypeScheme:
    """
    `forall params. body`.

    Args:
        `params`: `(name, BaseType)` pairs; int lists for shape
        parameters, bools for predicate parameters.

        `body`: The quantified refinement type.
    """
    params: tuple
    body: object

    @property
    def names(self):
        return tuple(name for name, _ in self.params)

    @property
    def is_refpoly(self):
        return any(base is BaseType.BOOL for _, base in self.params)


def weaken(ty, names):
    # type: (RType, Iterable[str]) -> RType
    """Drop every conjunct of `ty`'s refinements that mentions one of `names`."""
    names = set(names)

    def keep(p):
        return conj(*(a for a in conjuncts(p) if not (free_vars(a) & names)))
    return map_type_preds(ty, keep)


def stub_env(decls):
    # type: (Iterable[StubDecl]) -> dict
    """Name to `RType` or `TypeScheme`; later declarations win."""
    env = {}
    for decl in decls:
        if decl.pred_params:
            env[decl.name] = TypeScheme(tuple((b, BaseType.BOOL) for b in decl.pred_params), decl.ty)
        elif decl.shape_params:
            env[decl.name] = weaken(decl.ty, decl.shape_params)
        else:
            env[decl.name] = decl.ty
    return env


def freshen_binders(ty, avoid):
    """Rename every binder of `ty` apart from `avoid`."""
    avoid = set(avoid) | set(type_free_vars(ty))

    def go(t):
        new = fresh_name(t.var, avoid)
        avoid.add(new)
        t = rename_binder(t, new)
        if isinstance(t, Fun):
            return Fun(t.var, go(t.dom), go(t.cod))
        return t
    return go(ty)


#******************************************************************************
#                     Refinement-polymorphic instantiation
#******************************************************************************

def instantiate_refpoly_stub(scheme, deps, new_predvar):
    # type: (TypeScheme, tuple, Callable) -> RType
    """
    Replace each boolean parameter of `scheme` by a fresh predicate
    variable.

    A parameter used at several positions gets one shared predicate
    variable whose inputs are `deps`, the base binders in scope at the
    position, and the refinement binder. When the positions disagree on
    those binders the shared variable only sees `deps` and the binder.

    Args:
        `deps`: `(name, BaseType)` pairs of the use-site environment.

        `new_predvar`: Factory `(inputs, n_deps) -> PredVar`.
    """
    params = set(scheme.names)
    if not params:
        return scheme.body
    ty = freshen_binders(scheme.body, {n for n, _ in deps} | params)
    sites = {}

    def collect(t, scope):
        if isinstance(t, Base):
            for b in sorted(free_vars(t.pred) & params):
                sites.setdefault(b, []).append(scope + ((t.var, t.base),))
            return
        collect(t.dom, scope)
        inner = scope + ((t.var, t.dom.base),) if isinstance(t.dom, Base) else scope
        collect(t.cod, inner)
    collect(ty, ())

    shared = {}
    for b in sorted(sites):
        signatures = {tuple(base for _, base in s) for s in sites[b]}
        if len(signatures) == 1:
            inputs = tuple(deps) + sites[b][0]
            shared[b] = (new_predvar(inputs, len(deps)), True)
        else:
            binder = fresh_name("v", {n for n, _ in deps})
            inputs = tuple(deps) + ((binder, sites[b][0][-1][1]),)
            shared[b] = (new_predvar(inputs, len(deps)), False)

    dep_args = tuple(Var(n) for n, _ in deps)

    def rewrite(t, scope):
        if isinstance(t, Base):
            here = scope + ((t.var, t.base),)
            mapping = {}
            for b in free_vars(t.pred) & params:
                pv, full = shared[b]
                local = here if full else here[-1:]
                mapping[b] = PredApp(pv, dep_args + tuple(Var(n) for n, _ in local))
            return Base(t.var, t.base, subst_expr(t.pred, mapping)) if mapping else t
        inner = scope + ((t.var, t.dom.base),) if isinstance(t.dom, Base) else scope
        return Fun(t.var, rewrite(t.dom, scope), rewrite(t.cod, inner))
    return rewrite(ty, ())


#******************************************************************************
#                           Shape-polymorphic lets
#******************************************************************************

def _positions(ty, out, path=()):
    """`(path, Base)` for every base position of `ty`."""
    if isinstance(ty, Base):
        out.append((path, ty))
        return out
    _positions(ty.dom, out, path + ("dom",))
    _positions(ty.cod, out, path + ("cod",))
    return out


def _open_root(base, solution):
    """The defaulted predicate variable an unknown tensor position stands for, if any."""
    if base.base is not BaseType.TENSOR or not isinstance(base.pred, PredApp):
        return None
    app = base.pred
    if not app.args or app.args[-1] != Var(base.var):
        return None
    return solution.root(app.var)


def generalize(raw, solution, avoid=()):
    # type: (RType, Solution, Iterable[str]) -> TypeScheme | None
    """
    Scheme of a binding whose raw (unsolved) type is `raw`.

    Tensor positions left unknown by the solver that stand for the same
    predicate variable at two or more places share a shape parameter.
    Returns None when no such class exists.
    """
    classes = {}
    for path, base in _positions(raw, []):
        root = _open_root(base, solution)
        if root is not None:
            classes.setdefault(root, []).append(path)
    shared = [paths for paths in classes.values() if len(paths) >= 2]
    if not shared:
        return None
    taken = set(avoid) | _all_binders(raw) | set(type_free_vars(raw))
    params, at = [], {}
    for i, paths in enumerate(shared, start=1):
        name = fresh_name(f"S{i}", taken)
        taken.add(name)
        params.append((name, BaseType.INT_LIST))
        for path in paths:
            at[path] = name
    body = _rebuild(raw, solution, at, ())
    return TypeScheme(tuple(params), body)


def _all_binders(ty):
    if isinstance(ty, Base):
        return {ty.var}
    return {ty.var} | _all_binders(ty.dom) | _all_binders(ty.cod)


def _rebuild(ty, solution, at, path):
    if isinstance(ty, Base):
        if path in at:
            return Base(ty.var, ty.base, Eq(ShapeOf(Var(ty.var)), Var(at[path])))
        return Base(ty.var, ty.base, solution.apply(ty.pred))
    return Fun(ty.var, _rebuild(ty.dom, solution, at, path + ("dom",)),
               _rebuild(ty.cod, solution, at, path + ("cod",)))


def shape_literal(ty):
    """The literal shape a tensor type pins down, or None."""
    if not isinstance(ty, Base) or ty.base is not BaseType.TENSOR:
        return None
    me = ShapeOf(Var(ty.var))
    for atom in conjuncts(simplify(ty.pred)):
        if not isinstance(atom, Eq):
            continue
        for lhs, rhs in ((atom.left, atom.right), (atom.right, atom.left)):
            if lhs == me and isinstance(rhs, ShapeList) and all(isinstance(i, Num) for i in rhs.items):
                return tuple(i.value for i in rhs.items)
    return None


def _match(pattern, actual, params, out):
    if isinstance(pattern, Base):
        if not isinstance(actual, Base):
            raise InferenceFailed("argument is not of base type")
        pred = pattern.pred
        if (isinstance(pred, Eq) and pred.left == ShapeOf(Var(pattern.var))
                and isinstance(pred.right, Var) and pred.right.name in params):
            shape = shape_literal(actual)
            if shape is None:
                return
            name = pred.right.name
            if out.get(name, shape) != shape:
                raise InferenceFailed(f"{name} is both {list(out[name])} and {list(shape)}")
            out[name] = shape
        return
    if not isinstance(actual, Fun):
        raise InferenceFailed("argument is not a function")
    _match(pattern.dom, actual.dom, params, out)
    _match(pattern.cod, subst_type(actual.cod, {actual.var: Var(pattern.var)}), params, out)


def pt_var(scheme, arg_types):
    # type: (TypeScheme, list[RType]) -> tuple
    """
    Infer the shape arguments of `scheme` at a call site by matching its
    domains against the actual argument types, first-order.

    Returns the instantiated type and the shape literals in parameter order.

    Raises:
        `InferenceFailed`: Some parameter is not determined, or two
        arguments disagree on it.
    """
    params = set(scheme.names)
    out = {}
    ty = scheme.body
    for actual in arg_types:
        if not isinstance(ty, Fun):
            break
        _match(ty.dom, actual, params, out)
        ty = ty.cod
    missing = [n for n in scheme.names if n not in out]
    if missing:
        raise InferenceFailed(f"cannot infer {', '.join(missing)}")
    shapes = tuple(out[n] for n in scheme.names)
    mapping = {n: ShapeList(tuple(Num(d) for d in out[n])) for n in scheme.names}
    return subst_type(scheme.body, mapping), shapes


def variant_names(name, taken):
    """Fresh `name_poly` and `name_mono`."""
    poly_name = fresh_name(f"{name}_poly", taken)
    return poly_name, fresh_name(f"{name}_mono", set(taken) | {poly_name})


def pt_let(binding, scheme, names):
    # type: (TopBinding, TypeScheme, tuple[str, str]) -> tuple[TopBinding, TopBinding]
    """
    The polymorphic and monomorphic variants of `binding`, named by
    `names`: the former abstracts the shape parameters and checks the
    body against the scheme, the latter is the binding itself.
    """
    poly_name, mono_name = names
    term = Annot(binding.term, scheme.body, span=binding.span)
    for name, base in reversed(scheme.params):
        term = Lam(name, Base("v", base, TRUE), term, span=binding.span)
    return (TopBinding(poly_name, term, binding.span),
            TopBinding(mono_name, binding.term, binding.span))


@dataclass
class PolyReport:
    """
    What `monomorphize` did.

    `schemes` maps split bindings to their scheme; `resolved` and
    `fallbacks` list `(name, span, shapes or reason)` per call site;
    `unused_mono` names monomorphic variants nothing calls.
    """
    schemes: dict = field(default_factory=dict)
    resolved: list = field(default_factory=list)
    fallbacks: list = field(default_factory=list)
    unused_mono: list = field(default_factory=list)


def _spine(t):
    nodes = []
    while isinstance(t, App):
        nodes.append(t)
        t = t.fn
    return t, list(reversed(nodes))


class _CallRewriter:
    """
    Redirects every use of a split binding to its polymorphic variant
    (when the shape arguments can be inferred) or its monomorphic one.
    """

    def __init__(self, variants, arg_types, solution, report):
        self.variants = variants
        self.arg_types = arg_types
        self.solution = solution
        self.report = report
        self.used_mono = set()

    def term(self, t):
        if isinstance(t, App):
            head, nodes = _spine(t)
            if isinstance(head, Ident) and head.name in self.variants:
                return self._call(head, nodes)
            return replace(t, fn=self.term(t.fn), arg=self.term(t.arg))
        if isinstance(t, Ident):
            if t.name in self.variants:
                self.used_mono.add(t.name)
                return replace(t, name=self.variants[t.name][2])
            return t
        if isinstance(t, Lam):
            return replace(t, body=self.term(t.body))
        if isinstance(t, Let):
            return replace(t, rhs=self.term(t.rhs), body=self.term(t.body))
        if isinstance(t, Fix):
            return replace(t, body=self.term(t.body))
        if isinstance(t, If):
            return replace(t, then=self.term(t.then), else_=self.term(t.else_))
        if isinstance(t, Annot):
            return replace(t, term=self.term(t.term))
        if isinstance(t, Assert):
            return replace(t, body=self.term(t.body))
        return t

    def _call(self, head, nodes):
        scheme, poly_name, mono_name = self.variants[head.name]
        actual = []
        for node in nodes:
            ty = self.arg_types.get(id(node))
            actual.append(self.solution.apply_type(ty) if ty is not None else None)
        try:
            if any(a is None for a in actual):
                raise InferenceFailed("argument type unknown", head.span)
            _, shapes = pt_var(scheme, actual)
        except InferenceFailed as exc:
            logger.info("%s at %s falls back to %s: %s", head.name, head.span, mono_name, exc.message)
            self.report.fallbacks.append((head.name, head.span, exc.message))
            self.used_mono.add(head.name)
            out = replace(head, name=mono_name)
        else:
            self.report.resolved.append((head.name, head.span, shapes))
            out = Ident(poly_name, span=head.span)
            for shape in shapes:
                out = App(out, Const(shape, span=head.span), span=head.span)
        for node in nodes:
            out = App(out, self.term(node.arg), span=node.span)
        return out


def monomorphize(inference):
    # type: (Inference) -> tuple[Program, PolyReport]
    """
    Split generalizable top-level functions of an inferred program into
    `_poly` and `_mono` variants and redirect every call site.

    A binding none of whose call sites can be resolved is left alone,
    so a program without resolvable calls comes back unchanged.
    """
    program = inference.annotated
    taken = set(program.names())
    variants = {}
    for binding in program.bindings:
        if binding.is_main or not isinstance(binding.term, (Lam, Fix)):
            continue
        scheme = generalize(inference.raw_types[binding.name], inference.solution, taken)
        if scheme is None:
            continue
        names = variant_names(binding.name, taken)
        taken |= set(names)
        variants[binding.name] = (scheme,) + names

    trial = PolyReport()
    dry = _CallRewriter(variants, inference.arg_types, inference.solution, trial)
    for binding in program.bindings:
        dry.term(binding.term)
    resolved = {name for name, _, _ in trial.resolved}
    variants = {name: v for name, v in variants.items() if name in resolved}
    if not variants:
        return program, PolyReport(fallbacks=trial.fallbacks)

    report = PolyReport(schemes={name: v[0] for name, v in variants.items()})
    rewriter = _CallRewriter(variants, inference.arg_types, inference.solution, report)
    bindings = []
    for binding in program.bindings:
        term = rewriter.term(binding.term)
        if binding.name in variants:
            scheme, poly_name, mono_name = variants[binding.name]
            bindings += pt_let(replace(binding, term=term), scheme, (poly_name, mono_name))
        else:
            bindings.append(replace(binding, term=term))
    for name, (_, _, mono_name) in variants.items():
        if name not in rewriter.used_mono:
            report.unused_mono.append(mono_name)
            logger.warning("%s is never used", mono_name)
    return Program(bindings, program.stubs), report
