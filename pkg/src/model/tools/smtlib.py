"""SMT-LIB module.

This module turns refinement queries into SMT-LIB 2 scripts, so that
queries the built-in prover leaves unknown can be handed to an external
solver. Integer lists and tensor shapes are encoded with a length
constant and a bounded number of element constants.
"""
import logging
import subprocess

from model.ast import (
    Add, And, Append, BaseType, BoolConst, Broadcastable, Cons, Div, Eq, Head,
    Init, Last, Le, Len, Lt, Mul, Neg, Not, Nth, Num, Or, Prod, ShapeList,
    ShapeOf, Tail, Var,
)
from model.errors import EncodingError
from model.sorts import infer_sorts

logger = logging.getLogger(__name__)


class _List:

    def __init__(self, length, elems):
        self.length = length
        self.elems = elems


def _sym(name):
    return name if name.replace("_", "").isalnum() else f"|{name}|"


class SmtEncoder:
    """
    Encoder of one query.

    Args:
        `sorts`: Base type of every variable of the query.

        `max_len` (optional): Largest list length representable.
    """

    def __init__(self, sorts, max_len=6):
        self.sorts = dict(sorts)
        self.max_len = max_len
        self._decls = {}
        self._side = []

    def validity(self, hyp, goal):
        # type: (Expr, Expr) -> str
        """Script whose `unsat` answer means `hyp => goal` is valid."""
        body = f"(assert (not (=> {self.formula(hyp)} {self.formula(goal)})))"
        return self._script(body)

    def _script(self, body):
        lines = ["(set-logic ALL)", "(set-option :produce-models true)"]
        lines += [self._decls[k] for k in sorted(self._decls)]
        lines += [f"(assert {c})" for c in self._side]
        lines += [body, "(check-sat)", "(exit)"]
        return "\n".join(lines) + "\n"

    def _declare(self, name, sort):
        if name not in self._decls:
            self._decls[name] = f"(declare-const {_sym(name)} {sort})"
        return _sym(name)

    def _list_var(self, name, nonneg):
        length = self._declare(f"{name}.len", "Int")
        bound = f"(and (<= 0 {length}) (<= {length} {self.max_len}))"
        if bound not in self._side:
            self._side.append(bound)
        elems = []
        for i in range(self.max_len):
            sym = self._declare(f"{name}.{i}", "Int")
            if nonneg and f"(<= 0 {sym})" not in self._side:
                self._side.append(f"(<= 0 {sym})")
            elems.append(sym)
        return _List(length, elems)

    #**************************************************************************

    def formula(self, e):
        # type: (Expr) -> str
        if isinstance(e, BoolConst):
            return "true" if e.value else "false"
        if isinstance(e, Var):
            return self._declare(e.name, "Bool")
        if isinstance(e, Not):
            return f"(not {self.formula(e.arg)})"
        if isinstance(e, And):
            return f"(and {self.formula(e.left)} {self.formula(e.right)})"
        if isinstance(e, Or):
            return f"(or {self.formula(e.left)} {self.formula(e.right)})"
        if isinstance(e, Le):
            return f"(<= {self.int(e.left)} {self.int(e.right)})"
        if isinstance(e, Lt):
            return f"(< {self.int(e.left)} {self.int(e.right)})"
        if isinstance(e, Eq):
            return self._eq(e)
        if isinstance(e, Broadcastable):
            return self._broadcastable(self.list(e.left), self.list(e.right))
        raise EncodingError(f"no SMT-LIB encoding for {type(e).__name__}")

    def _eq(self, e):
        sort = self._sort_hint(e.left) or self._sort_hint(e.right)
        if sort is BaseType.INT_LIST:
            a, b = self.list(e.left), self.list(e.right)
            parts = [f"(= {a.length} {b.length})"]
            for i in range(self.max_len):
                parts.append(f"(=> (< {i} {a.length}) (= {a.elems[i]} {b.elems[i]}))")
            return "(and " + " ".join(parts) + ")"
        if sort is BaseType.BOOL:
            return f"(= {self.formula(e.left)} {self.formula(e.right)})"
        return f"(= {self.int(e.left)} {self.int(e.right)})"

    def _sort_hint(self, e):
        if isinstance(e, (ShapeList, ShapeOf, Cons, Append, Tail, Init)):
            return BaseType.INT_LIST
        if isinstance(e, Var):
            base = self.sorts.get(e.name)
            return BaseType.INT_LIST if base is BaseType.TENSOR else base
        if isinstance(e, (BoolConst, Eq, Not, And, Or, Le, Lt, Broadcastable)):
            return BaseType.BOOL
        if isinstance(e, (Num, Add, Mul, Div, Neg, Len, Nth, Head, Last, Prod)):
            return BaseType.INT
        return None

    def int(self, e):
        # type: (Expr) -> str
        if isinstance(e, Num):
            return str(e.value) if e.value >= 0 else f"(- {-e.value})"
        if isinstance(e, Var):
            return self._declare(e.name, "Int")
        if isinstance(e, Neg):
            return f"(- {self.int(e.arg)})"
        if isinstance(e, Add):
            return f"(+ {self.int(e.left)} {self.int(e.right)})"
        if isinstance(e, Mul):
            return f"(* {self.int(e.left)} {self.int(e.right)})"
        if isinstance(e, Div):
            return f"(div {self.int(e.left)} {self.int(e.right)})"
        if isinstance(e, Len):
            return self.list(e.arg).length
        if isinstance(e, Nth):
            return self._pick(self.list(e.arg), self.int(e.index))
        if isinstance(e, Head):
            return self.list(e.arg).elems[0]
        if isinstance(e, Last):
            s = self.list(e.arg)
            return self._pick(s, f"(- {s.length} 1)")
        if isinstance(e, Prod):
            s = self.list(e.arg)
            out = "0"
            for n in range(self.max_len, -1, -1):
                prod = "1" if n == 0 else (s.elems[0] if n == 1 else f"(* {' '.join(s.elems[:n])})")
                out = f"(ite (= {s.length} {n}) {prod} {out})"
            return out
        raise EncodingError(f"no SMT-LIB encoding for {type(e).__name__}")

    def list(self, e):
        # type: (Expr) -> _List
        k = self.max_len
        if isinstance(e, ShapeOf) and isinstance(e.arg, Var):
            return self._list_var(e.arg.name, True)
        if isinstance(e, Var):
            return self._list_var(e.name, self.sorts.get(e.name) is BaseType.TENSOR)
        if isinstance(e, ShapeList):
            if len(e.items) > k:
                raise EncodingError(f"shape literal longer than {k}")
            elems = [self.int(i) for i in e.items]
            return _List(str(len(elems)), elems + ["0"] * (k - len(elems)))
        if isinstance(e, Cons):
            t = self.list(e.tail)
            return _List(f"(+ 1 {t.length})", [self.int(e.head)] + t.elems[:k - 1])
        if isinstance(e, Tail):
            t = self.list(e.arg)
            return _List(f"(- {t.length} 1)", t.elems[1:] + ["0"])
        if isinstance(e, Init):
            t = self.list(e.arg)
            return _List(f"(- {t.length} 1)", t.elems)
        if isinstance(e, Append):
            a, b = self.list(e.left), self.list(e.right)
            elems = [f"(ite (< {i} {a.length}) {a.elems[i]} {self._pick(b, f'(- {i} {a.length})')})"
                     for i in range(k)]
            return _List(f"(+ {a.length} {b.length})", elems)
        raise EncodingError(f"no SMT-LIB encoding for {type(e).__name__}")

    @staticmethod
    def _pick(s, index):
        out = "0"
        for j in range(len(s.elems) - 1, -1, -1):
            out = f"(ite (= {index} {j}) {s.elems[j]} {out})"
        return out

    def _broadcastable(self, a, b):
        parts = []
        for k in range(1, self.max_len + 1):
            x = self._pick(a, f"(- {a.length} {k})")
            y = self._pick(b, f"(- {b.length} {k})")
            parts.append(f"(=> (and (<= {k} {a.length}) (<= {k} {b.length})) "
                         f"(or (= {x} {y}) (= {x} 1) (= {y} 1)))")
        return "(and " + " ".join(parts) + ")"


def emit_smtlib2(prefix, hyp, goal, max_len=6):
    # type: (tuple, Expr, Expr, int) -> str
    """
    SMT-LIB 2 script for the validity of `hyp => goal` over the
    variables of `prefix` (name, base type pairs).

    Raises:
        `EncodingError`: The query uses an operator outside the encodable fragment.
    """
    sorts = infer_sorts((hyp, goal), dict(prefix))
    return SmtEncoder(sorts, max_len).validity(hyp, goal)


def run_solver(command, script, timeout=10):
    # type: (str, str, int) -> str
    """Feed `script` to an external solver and return its first output line."""
    try:
        result = subprocess.run(command.split(),
                                input=script,
                                capture_output=True,
                                encoding="UTF-8",
                                timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as exc:
        logger.warning("solver %s failed: %s", command, exc)
        return "unknown"
    lines = result.stdout.splitlines()
    return lines[0].strip() if lines else "unknown"
