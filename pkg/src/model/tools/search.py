"""Search module.

This module provides a class for finding concrete witnesses of
refinement formulas: assignments of ints, bools, lists and tensor
shapes under which a formula evaluates to true.

The search runs over the variables the prover could not eliminate;
the eliminated ones are recomputed from their defining rules, and every
candidate is checked against the original formula before it is returned.
"""
import itertools
import logging
import random
import zlib

from model.ast import BaseType, Num, ShapeOf, Var, free_vars, walk
from model.errors import EvalError
from model.logic import eval_expr, holds
from model.tools.engine import Prover, is_skolem

logger = logging.getLogger(__name__)

MAX_RANK = 3


class Search:
    """
    Search object for witnesses of a formula.
    """

    def __init__(self,
            sorts: dict,
            limit: int = 20000,
            rounds: int = 64,
            int_range: tuple = (-4, 4),
            list_len: int = MAX_RANK,
            elem_range: tuple = (0, 4)
        ) -> None:
        """
        Args:
            `sorts`: Base type of every variable that may occur in a query.

            `limit` (optional): Maximum number of candidate assignments
            tried per query. Domains larger than this are sampled.

            `rounds` (optional): Saturation cap handed to the prover.

            `int_range` (optional): Bounds of the integers tried first.

            `list_len` (optional): Longest list or shape tried.

            `elem_range` (optional): Bounds of list elements and dimensions.
        """
        self.sorts = dict(sorts)
        self.limit = limit
        self.rounds = rounds
        self.int_range = tuple(int_range)
        self.list_len = list_len
        self.elem_range = tuple(elem_range)


#**************
#*  Witness   *
#**************

    def find(self, formula, order=()):
        # type: (Expr, tuple) -> dict | None
        """
        Look for an assignment satisfying `formula`.

        Returns:
            `dict`: Variable name to value (tensors map to their shape),
            or None when no witness was found within the limit.
        """
        prover = Prover((formula,), self.sorts, order, self.rounds)
        if prover.inconsistent:
            return None
        sorts = dict(self.sorts)
        sorts.update(prover.sorts)
        rules = prover.eliminated()
        constraints = prover.reduced_constraints()

        targets = sorted(n for n in free_vars(formula) if not is_skolem(n))
        defined = {self._name(lhs) for lhs in rules}
        open_vars = set()
        for e in constraints + list(rules.values()):
            open_vars |= free_vars(e)
        for name in targets:
            if name not in defined:
                open_vars.add(name)
        open_vars -= defined
        open_vars = sorted(open_vars)

        constants = self._harvest(formula)
        domains = [self._domain(sorts.get(name, BaseType.INT), constants, name) for name in open_vars]
        seed = zlib.crc32(repr(formula).encode())
        for values in self._candidates(domains, seed):
            assignment = dict(zip(open_vars, values))
            if not self._complete(assignment, rules, targets, sorts):
                continue
            if not all(holds(c, assignment) for c in constraints):
                continue
            if holds(formula, assignment):
                return {name: assignment[name] for name in targets if name in assignment}
        logger.debug("no witness within %d candidates", self.limit)
        return None

    @staticmethod
    def _name(e):
        return e.name if isinstance(e, Var) else e.arg.name

    def _candidates(self, domains, seed):
        size = 1
        for d in domains:
            size *= len(d)
            if size > self.limit:
                break
        if size <= self.limit:
            yield from itertools.product(*domains)
            return
        rng = random.Random(seed)
        for _ in range(self.limit):
            yield tuple(rng.choice(d) for d in domains)

    def _complete(self, assignment, rules, targets, sorts):
        """Fill in eliminated variables from their rules; False if one cannot be evaluated."""
        pending = dict(rules)
        for _ in range(len(pending) + 1):
            if not pending:
                break
            for lhs, rhs in list(pending.items()):
                if not free_vars(rhs) <= set(assignment):
                    continue
                try:
                    value = eval_expr(rhs, assignment)
                except EvalError:
                    return False
                if isinstance(lhs, ShapeOf) and any(d < 0 for d in value):
                    return False
                assignment[self._name(lhs)] = value
                del pending[lhs]
        if pending:
            return False
        for name in targets:
            if name not in assignment:
                assignment[name] = _default(sorts.get(name, BaseType.INT))
        return True

    @staticmethod
    def _harvest(formula):
        """Numerals of `formula`, with their pairwise sums and products."""
        found = sorted({n.value for n in walk(formula) if isinstance(n, Num)})
        extra = set(found)
        for a, b in itertools.combinations_with_replacement(found[:12], 2):
            extra.update((a + b, a * b))
        return sorted(extra, key=lambda v: (abs(v), v))

    def _domain(self, base, constants, name):
        if base is BaseType.BOOL:
            return (False, True)
        if base is BaseType.INT:
            ints = _ordered(range(self.int_range[0], self.int_range[1] + 1))
            dims = tuple(range(max(self.elem_range[0], 0), self.elem_range[1] + 1))
            extra = [c for c in constants if c not in ints]
            if is_skolem(name):
                extra = [c for c in extra if c >= 0]
            base_range = dims if is_skolem(name) else ints
            return tuple(base_range) + tuple(extra)
        top = self.elem_range[1]
        dims = tuple(range(self.elem_range[0], top + 1)) + tuple(c for c in constants if c > top)[:4]
        shapes = []
        for rank in range(self.list_len + 1):
            shapes.extend(itertools.product(dims, repeat=rank))
            if len(shapes) > 400:
                break
        return tuple(shapes)


def _ordered(values):
    return tuple(sorted(values, key=lambda v: (abs(v), v < 0)))


def _default(base):
    if base is BaseType.BOOL:
        return False
    if base is BaseType.INT:
        return 0
    return ()
