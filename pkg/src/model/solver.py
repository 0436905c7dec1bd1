"""Solver module.

Validity and satisfiability queries over the refinement logic.
`Valid` and `Unsat` come only from the prover; `Invalid` and `Sat`
carry a witness that was checked by evaluation; everything else is
`Unknown`. Answers are memoized per process.
"""
import hashlib
import logging
import os
import threading
from dataclasses import dataclass
from enum import Enum

from model.ast import conj, conjuncts, has_pred_app
from model.errors import EncodingError, WfError
from model.logic import negate
from model.sorts import infer_sorts
from model.tools.engine import Prover
from model.tools.search import Search
from model.tools.smtlib import emit_smtlib2, run_solver

logger = logging.getLogger(__name__)


class Verdict(Enum):
    VALID = "valid"
    INVALID = "invalid"
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Answer:
    verdict: Verdict
    witness: dict = None

    @property
    def valid(self):
        return self.verdict is Verdict.VALID

    @property
    def unsat(self):
        return self.verdict is Verdict.UNSAT


@dataclass
class SolverOptions:
    """
    Knobs of the query procedures, set once per run from `Settings`.
    """
    rounds: int = 400
    search_limit: int = 3000
    int_range: tuple = (-4, 4)
    list_len: int = 3
    elem_range: tuple = (0, 4)
    smt_out: str = None
    smt_solver: str = None
    smt_bound: int = 3


options = SolverOptions()
_cache = {}
_lock = threading.Lock()


def configure(**kw):
    """Set solver options; unknown names raise `AttributeError`."""
    errors = [k for k in kw if not hasattr(options, k)]
    if errors:
        raise AttributeError('SolverOptions object has no attributes: ' + str(errors))
    for k, v in kw.items():
        setattr(options, k, v)
    clear_cache()


def clear_cache():
    with _lock:
        _cache.clear()


def _memo(key, compute):
    with _lock:
        if key in _cache:
            return _cache[key]
    answer = compute()
    with _lock:
        _cache[key] = answer
    return answer


def _sorts(prefix, exprs):
    return infer_sorts(exprs, dict(prefix))


def check_validity(prefix, hyp, goal, search=True, allow_predvars=False):
    # type: (tuple, Expr, Expr, bool, bool) -> Answer
    """
    Decide `forall prefix. hyp => goal`.

    Args:
        `prefix`: `(name, BaseType)` pairs in binding order.

        `hyp`, `goal`: Predicates over the prefix.

        `search` (optional): Look for a counterexample when the
        prover fails.

        `allow_predvars` (optional): Accept unsolved predicate variables.

    Raises:
        `WfError`: A predicate variable was found and `allow_predvars` is off.
    """
    if not allow_predvars and (has_pred_app(hyp) or has_pred_app(goal)):
        raise WfError("validity query with unsolved predicate variables")
    key = ("valid", tuple(prefix), hyp, goal, search)
    return _memo(key, lambda: _validity(tuple(prefix), hyp, goal, search))


def _search(sorts):
    return Search(sorts, options.search_limit, options.rounds,
                  options.int_range, options.list_len, options.elem_range)


def _validity(prefix, hyp, goal, search):
    sorts = _sorts(prefix, (hyp, goal))
    order = [name for name, _ in prefix]
    prover = Prover(conjuncts(hyp), sorts, order, options.rounds)
    if prover.proves(goal):
        return Answer(Verdict.VALID)
    if search:
        witness = _search(sorts).find(
            conj(hyp, negate(goal)), order)
        if witness is not None:
            return Answer(Verdict.INVALID, witness)
    _dump_unknown(prefix, hyp, goal)
    return Answer(Verdict.UNKNOWN)


def check_sat(prefix, p, search=True):
    # type: (tuple, Expr, bool) -> Answer
    """Decide whether some assignment of the prefix satisfies `p`."""
    if has_pred_app(p):
        raise WfError("satisfiability query with unsolved predicate variables")
    key = ("sat", tuple(prefix), p, search)
    return _memo(key, lambda: _satisfiability(tuple(prefix), p, search))


def _satisfiability(prefix, p, search):
    sorts = _sorts(prefix, (p,))
    order = [name for name, _ in prefix]
    prover = Prover(conjuncts(p), sorts, order, options.rounds)
    if prover.inconsistent:
        return Answer(Verdict.UNSAT)
    if search:
        witness = _search(sorts).find(p, order)
        if witness is not None:
            return Answer(Verdict.SAT, witness)
    return Answer(Verdict.UNKNOWN)


def _dump_unknown(prefix, hyp, goal):
    if not options.smt_out and not options.smt_solver:
        return
    try:
        script = emit_smtlib2(prefix, hyp, goal, options.smt_bound)
    except EncodingError as exc:
        logger.info("unknown query not encodable: %s", exc.message)
        return
    if options.smt_out:
        os.makedirs(options.smt_out, exist_ok=True)
        digest = hashlib.sha1(script.encode()).hexdigest()[:12]
        path = os.path.join(options.smt_out, f"{digest}.smt2")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(script)
        logger.info("unknown query written to %s", path)
    if options.smt_solver:
        answer = run_solver(options.smt_solver, script)
        logger.info("external solver says %s for unknown query", answer)
