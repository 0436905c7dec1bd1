"""Prover module.

This module implements the decision procedure behind validity and
satisfiability queries: hypothesis atoms are saturated into a set of
oriented rewrite rules, facts and integer bounds, and goals are proved
by rewriting, by membership, or by refuting their negation.

Every `Valid` and `Unsat` answer of the checker comes from here, so the
prover may fail to prove a true goal but never proves a false one.
"""
import copy
import logging

from model.ast import (
    And, BaseType, BoolConst, Eq, Le, Len, Lt, Not, Nth, Num, Or, PredApp,
    Prod, Head, Last, ShapeList, ShapeOf, Var, FALSE, TRUE, children, conjuncts,
    disjuncts, free_vars, map_children,
)
from model.logic import ONE, difference, from_linear, is_ground, negate, partial_terms, simplify
from model.sorts import Sort, expr_sort

logger = logging.getLogger(__name__)

SKOLEM_MAX = 8


def skolem(name, i):
    """Name of the `i`-th dimension of shape variable `name`."""
    return Var(f"{name}#{i}")


def is_skolem(name):
    return "#" in name


def is_varlike(e):
    return isinstance(e, Var) or (isinstance(e, ShapeOf) and isinstance(e.arg, Var))


def _var_name(e):
    return e.name if isinstance(e, Var) else e.arg.name


def mentions(e, x):
    """Whether `x` occurs in `e` outside predicate variable arguments."""
    if isinstance(x, Var):
        if x.name not in free_vars(e):
            return False
    stack = [e]
    while stack:
        node = stack.pop()
        if node == x:
            return True
        if isinstance(node, PredApp):
            continue
        stack.extend(children(node))
    return False


def _list_pairs(e):
    """Dimension pairs of an equality between two literal shapes, else None."""
    if not (isinstance(e, Eq) and isinstance(e.left, ShapeList) and isinstance(e.right, ShapeList)):
        return None
    if len(e.left.items) != len(e.right.items):
        return None
    return list(zip(e.left.items, e.right.items))


def _floor_div(a, b):
    return a // b


def _ceil_div(a, b):
    return -((-a) // b)


class Prover:
    """
    Saturated hypothesis set.

    Args:
        `hypotheses` (optional): Atoms assumed true.

        `sorts` (optional): Base type of each variable.

        `order` (optional): Variable names in binding order. Equalities
        between two variables eliminate the later-bound one.

        `rounds` (optional): Cap on saturation rounds.

        `skolemize` (optional): Expand shapes of known length into
        per-dimension variables.
    """

    def __init__(self, hypotheses=(), sorts=None, order=(), rounds=64, skolemize=True):
        self.sorts = dict(sorts or {})
        self.rank = {name: i for i, name in enumerate(order)}
        self.rounds = rounds
        self.skolemize = skolemize
        self.rules = {}
        self.facts = []
        self._fact_set = set()
        self.inequalities = {}
        self.bounds = {}
        self.nonneg = set()
        self.inconsistent = False
        self.defined = set()
        self._queue = []
        self._length_links = set()
        self.assume(*hypotheses)

    def copy(self):
        other = copy.copy(self)
        other.sorts = dict(self.sorts)
        other.rules = dict(self.rules)
        other.facts = list(self.facts)
        other._fact_set = set(self._fact_set)
        other.inequalities = dict(self.inequalities)
        other.bounds = {k: list(v) for k, v in self.bounds.items()}
        other.nonneg = set(self.nonneg)
        other.defined = set(self.defined)
        other._queue = list(self._queue)
        other._length_links = set(self._length_links)
        return other

    #**************************************************************************
    #                               Saturation
    #**************************************************************************

    def assume(self, *atoms):
        """Add hypotheses and saturate."""
        self._queue.extend(atoms)
        rounds = 0
        while self._queue and not self.inconsistent:
            rounds += 1
            if rounds > self.rounds:
                logger.debug("prover stopped after %d rounds", self.rounds)
                self._queue.clear()
                break
            batch, self._queue = self._queue, []
            for atom in batch:
                self._add(atom)
                if self.inconsistent:
                    return

    def normalize(self, e):
        # type: (Expr) -> Expr
        """Rewrite `e` with the current rules and simplify, to a fixpoint."""
        for _ in range(32):
            new = simplify(self._rewrite(e))
            if new == e:
                return new
            e = new
        return e

    def _rewrite(self, e):
        if not self.rules:
            return e
        hit = self.rules.get(e)
        if hit is not None:
            return hit
        if isinstance(e, (Var, Num, BoolConst, PredApp)):
            return e
        new = map_children(e, self._rewrite)
        if new is not e:
            hit = self.rules.get(new)
            if hit is not None:
                return hit
        return new

    def _contradict(self, why):
        logger.debug("hypotheses inconsistent: %s", why)
        self.inconsistent = True

    def _add(self, atom):
        self.defined |= partial_terms(atom)
        a = self.normalize(atom)
        self.defined |= partial_terms(a)
        if a == TRUE:
            return
        if a == FALSE:
            self._contradict(atom)
            return
        if isinstance(a, And):
            for c in conjuncts(a):
                self._add(c)
            return
        if (isinstance(a, Eq) and isinstance(a.left, ShapeList) and isinstance(a.right, ShapeList)
                and len(a.left.items) != len(a.right.items)):
            self._contradict(a)
            return
        pairs = _list_pairs(a)
        if pairs is not None:
            for left, right in pairs:
                self._add(Eq(left, right))
            return
        if isinstance(a, Eq) and self._orient(a):
            return
        if isinstance(a, Var):
            self._add_rule(a, TRUE)
            return
        if isinstance(a, Not) and isinstance(a.arg, Var):
            self._add_rule(a.arg, FALSE)
            return
        if isinstance(a, (Le, Lt)):
            a = self._inequality(a)
            if a is None:
                return
        if negate(a) in self._fact_set or (isinstance(a, Not) and a.arg in self._fact_set):
            self._contradict(a)
            return
        if a not in self._fact_set:
            self.facts.append(a)
            self._fact_set.add(a)

    def _key(self, e):
        name = _var_name(e)
        if is_skolem(name):
            return (-1, name)
        return (self.rank.get(name, len(self.rank)), name)

    def _elimination_order(self, m):
        # latest-bound variables first, then compound atoms
        if isinstance(m, Var):
            rank, name = self._key(m)
            return (0, -rank, name)
        return (1, 0, repr(m))

    def _orient(self, eq):
        left, right = eq.left, eq.right
        sort = expr_sort(left, self.sorts) or expr_sort(right, self.sorts)
        if sort is Sort.INT:
            return self._orient_int(left, right)
        lv, rv = is_varlike(left), is_varlike(right)
        if lv and rv:
            lhs, rhs = (left, right) if self._key(left) > self._key(right) else (right, left)
            self._add_rule(lhs, rhs)
            return True
        if lv and not mentions(right, left):
            self._add_rule(left, right)
            return True
        if rv and not mentions(left, right):
            self._add_rule(right, left)
            return True
        if sort is Sort.SHAPE:
            link = (left, right)
            if link not in self._length_links:
                self._length_links.add(link)
                self._queue.append(Eq(Len(left), Len(right)))
            if is_ground(right) and not is_ground(left):
                self._add_rule(left, right)
                return True
            if is_ground(left) and not is_ground(right):
                self._add_rule(right, left)
                return True
        return False

    def _orient_int(self, left, right):
        form = difference(left, right)
        monomials = [m for m in form if m != ONE]
        if not monomials:
            if form.get(ONE, 0):
                self._contradict(Eq(left, right))
            return True
        candidates = [m for m in monomials if abs(form[m]) == 1]
        candidates.sort(key=self._elimination_order)
        for m in candidates:
            sign = form[m]
            rest = {k: -sign * c for k, c in form.items() if k != m}
            rhs = simplify(from_linear(rest))
            if mentions(rhs, m):
                continue
            self._add_rule(m, rhs)
            return True
        return False

    def _add_rule(self, lhs, rhs):
        self.rules[lhs] = rhs
        self.defined |= partial_terms(rhs)
        for key in list(self.rules):
            if key == lhs:
                continue
            value = self.rules[key]
            if mentions(key, lhs):
                del self.rules[key]
                self._queue.append(Eq(key, value))
                continue
            new = self.normalize(value)
            if new != value:
                if mentions(new, key):
                    del self.rules[key]
                    self._queue.append(Eq(key, new))
                else:
                    self.rules[key] = new
                    self.defined |= partial_terms(new)
        stale = [f for f in self.facts if mentions(f, lhs)]
        if stale:
            for f in stale:
                self._fact_set.discard(f)
            self.facts = [f for f in self.facts if f not in stale]
            for key in [k for k in self.inequalities if mentions(k, lhs)]:
                del self.inequalities[key]
            for key in [k for k in self.bounds if mentions(k, lhs)]:
                del self.bounds[key]
            self._queue.extend(stale)
        self._check_value(lhs, rhs)
        self._expand_length(lhs, rhs)

    def _expand_length(self, lhs, rhs):
        if not (self.skolemize and isinstance(lhs, Len) and isinstance(rhs, Num)):
            return
        shape = lhs.arg
        if not is_varlike(shape) or not 0 <= rhs.value <= SKOLEM_MAX or shape in self.rules:
            return
        name = _var_name(shape)
        dims = tuple(skolem(name, i) for i in range(rhs.value))
        for d in dims:
            self.sorts[d.name] = BaseType.INT
            if isinstance(shape, ShapeOf):
                self.nonneg.add(d)
        self._queue.append(Eq(shape, ShapeList(dims)))

    #**************************************************************************
    #                                 Bounds
    #**************************************************************************

    def _floor(self, m):
        if isinstance(m, Len) or m in self.nonneg:
            return 0
        if isinstance(m, (Nth, Head, Last, Prod)) and isinstance(m.arg, ShapeOf):
            return 0
        return None

    def lower(self, m):
        bound = self.bounds.get(m)
        return bound[0] if bound else self._floor(m)

    def upper(self, m):
        bound = self.bounds.get(m)
        return bound[1] if bound else None

    def _bound(self, m, lo=None, hi=None):
        bound = self.bounds.setdefault(m, [self._floor(m), None])
        if lo is not None and (bound[0] is None or lo > bound[0]):
            bound[0] = lo
        if hi is not None and (bound[1] is None or hi < bound[1]):
            bound[1] = hi
        if bound[0] is not None and bound[1] is not None and bound[0] > bound[1]:
            self._contradict(f"{m} in [{bound[0]}, {bound[1]}]")

    def _check_value(self, m, value):
        if not isinstance(value, Num):
            return
        lo, hi = self.lower(m), self.upper(m)
        if (lo is not None and value.value < lo) or (hi is not None and value.value > hi):
            self._contradict(f"{m} = {value.value}")

    def _inequality(self, atom):
        """Record `atom` as `sum <= k`; return the canonical atom, or None when absorbed."""
        form = difference(atom.left, atom.right)
        if isinstance(atom, Lt):
            form[ONE] = form.get(ONE, 0) + 1
        limit = -form.pop(ONE, 0)
        if not form:
            if limit < 0:
                self._contradict(atom)
            return None
        if len(form) == 1:
            (m, c), = form.items()
            if c > 0:
                self._bound(m, hi=_floor_div(limit, c))
            else:
                self._bound(m, lo=_ceil_div(limit, c))
        key = from_linear(form)
        if key in self.inequalities and self.inequalities[key] <= limit:
            return None
        self.inequalities[key] = limit
        return Le(key, Num(limit))

    def _entails_inequality(self, atom):
        form = difference(atom.left, atom.right)
        if isinstance(atom, Lt):
            form[ONE] = form.get(ONE, 0) + 1
        limit = -form.pop(ONE, 0)
        if not form:
            return limit >= 0
        if len(form) == 1:
            (m, c), = form.items()
            if c > 0:
                hi = self.upper(m)
                if hi is not None and hi <= _floor_div(limit, c):
                    return True
            else:
                lo = self.lower(m)
                if lo is not None and lo >= _ceil_div(limit, c):
                    return True
        known = self.inequalities.get(from_linear(form))
        return known is not None and known <= limit

    #**************************************************************************
    #                                 Goals
    #**************************************************************************

    def proves(self, goal):
        # type: (Expr) -> bool
        """Whether the hypotheses entail `goal`."""
        if self.inconsistent:
            return True
        return self._holds(self.normalize(goal))

    def _holds(self, g):
        if g == TRUE:
            return True
        if g == FALSE:
            return False
        if isinstance(g, And):
            return all(self._holds(c) for c in conjuncts(g))
        if isinstance(g, Or) and any(self._holds(d) for d in disjuncts(g)):
            return True
        if g in self._fact_set:
            return True
        if isinstance(g, (Le, Lt)) and self._entails_inequality(g):
            return True
        if isinstance(g, Eq) and g.left == g.right and self._defined(g.left):
            return True
        if (isinstance(g, Eq) and expr_sort(g.left, self.sorts) is Sort.INT
                and not difference(g.left, g.right) and self._defined(g)):
            return True
        pairs = _list_pairs(g)
        if pairs is not None:
            if all(self._holds(simplify(Eq(left, right))) for left, right in pairs):
                return True
        if isinstance(g, PredApp):
            return False
        return self.refutes(negate(g))

    def _defined(self, e):
        """Whether every partial subterm of `e` is known to be defined."""
        return partial_terms(e) <= self.defined

    def refutes(self, atom):
        """Whether adding `atom` makes the hypotheses inconsistent."""
        child = self.copy()
        child.assume(atom)
        return child.inconsistent

    def reduced_constraints(self):
        """
        The saturated state as a list of atoms: every fact, plus every
        rule whose left-hand side is not a plain variable.
        """
        out = list(self.facts)
        for lhs, rhs in self.rules.items():
            if not is_varlike(lhs):
                out.append(Eq(lhs, rhs))
        return out

    def eliminated(self):
        """Rules that define a variable (or a tensor's shape)."""
        return {lhs: rhs for lhs, rhs in self.rules.items() if is_varlike(lhs)}
