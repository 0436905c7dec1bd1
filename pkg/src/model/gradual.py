"""Gradual module.

Precision between types, source programs and elaborated programs,
a generator of program pairs that differ only in how precise their
annotations are, and the static and dynamic gradual guarantee checks
run over such pairs by `shapecast proptest`.
"""
import logging
import random
from collections import Counter
from dataclasses import dataclass, field

from model.ast import (Annot, App, Assert, Base, Const, Fix, Fun, Ident, If, Lam, Let,
                       Not, Prim, PrimVal, TensorVal, TRUE, TypeEnv, conj, rename_binder,
                       rename_term, value_expr)
from model.errors import ShapeMismatch, StructureMismatch
from model.printer import print_type
from model.runtime import Blame, Evaluator, OutOfFuel, Stuck, program_term, show_value
from model.solver import Verdict, check_validity
import model.file_op as fo

logger = logging.getLogger(__name__)


#******************************************************************************
#                               Precision
#******************************************************************************

def combine(*verdicts):
    # type: (*Verdict) -> Verdict
    """`INVALID` beats `UNKNOWN`, which beats `VALID`."""
    if Verdict.INVALID in verdicts:
        return Verdict.INVALID
    if Verdict.UNKNOWN in verdicts:
        return Verdict.UNKNOWN
    return Verdict.VALID


def type_precision(left, right, scope=(), assume_domain=False, hyp=TRUE):
    # type: (RType, RType, tuple, bool, Expr) -> Verdict
    """
    Whether `left` is at least as precise as `right`: same erasure, and
    every refinement of `left` implies the matching one of `right`.
    Domains and codomains are compared independently and covariantly.

    Args:
        `scope`: `(name, BaseType)` pairs the refinements may mention.

        `assume_domain` (optional): Compare codomains assuming the
        argument satisfies the left domain.

        `hyp` (optional): Facts about the scope.

    Raises:
        `ShapeMismatch`: The erasures differ.
    """
    if isinstance(left, Base) and isinstance(right, Base):
        if left.base is not right.base:
            raise ShapeMismatch(f"{print_type(left)} and {print_type(right)} have different erasures")
        right = rename_binder(right, left.var)
        prefix = tuple(scope) + ((left.var, left.base),)
        return check_validity(prefix, conj(hyp, left.pred), right.pred).verdict
    if isinstance(left, Fun) and isinstance(right, Fun):
        dom = type_precision(left.dom, right.dom, scope, assume_domain, hyp)
        right = rename_binder(right, left.var)
        inner, cod_hyp = scope, hyp
        if isinstance(left.dom, Base):
            inner = tuple(scope) + ((left.var, left.dom.base),)
            if assume_domain:
                cod_hyp = conj(hyp, rename_binder(left.dom, left.var).pred)
        cod = type_precision(left.cod, right.cod, inner, assume_domain, cod_hyp)
        return combine(dom, cod)
    raise ShapeMismatch(f"{print_type(left)} and {print_type(right)} have different erasures")


def _ann_precision(left, right, scope):
    if right is None:
        return Verdict.VALID
    if left is None:
        return Verdict.INVALID
    return type_precision(left, right, scope)


def _extend(scope, var, ann):
    if isinstance(ann, Base):
        return tuple(scope) + ((var, ann.base),)
    return scope


def _mismatch(left, right):
    return StructureMismatch(
        f"{type(left).__name__} and {type(right).__name__} are not congruent",
        getattr(left, "span", None))


def term_precision(left, right, scope=()):
    # type: (Term, Term, tuple) -> Verdict
    """
    Precision of two source terms of the same shape. `right` may lack
    annotations that `left` has; a missing annotation is the least
    precise one.

    Raises:
        `StructureMismatch`: The terms differ in more than annotations.
    """
    if isinstance(left, Annot):
        if isinstance(right, Annot):
            return combine(type_precision(left.ty, right.ty, scope),
                           term_precision(left.term, right.term, scope))
        return term_precision(left.term, right, scope)
    if type(left) is not type(right):
        raise _mismatch(left, right)
    if isinstance(left, (Const, Ident, TensorVal, Prim)):
        if left != right:
            raise _mismatch(left, right)
        return Verdict.VALID
    if isinstance(left, Lam):
        if left.var != right.var:
            raise _mismatch(left, right)
        return combine(_ann_precision(left.ann, right.ann, scope),
                       term_precision(left.body, right.body, _extend(scope, left.var, left.ann)))
    if isinstance(left, App):
        return combine(term_precision(left.fn, right.fn, scope),
                       term_precision(left.arg, right.arg, scope))
    if isinstance(left, Let):
        if left.var != right.var:
            raise _mismatch(left, right)
        return combine(_ann_precision(left.ann, right.ann, scope),
                       term_precision(left.rhs, right.rhs, scope),
                       term_precision(left.body, right.body, _extend(scope, left.var, left.ann)))
    if isinstance(left, Fix):
        if (left.fn, left.var) != (right.fn, right.var):
            raise _mismatch(left, right)
        dom = left.ann.dom if isinstance(left.ann, Fun) else None
        return combine(_ann_precision(left.ann, right.ann, scope),
                       term_precision(left.body, right.body, _extend(scope, left.var, dom)))
    if isinstance(left, If):
        return combine(term_precision(left.cond, right.cond, scope),
                       term_precision(left.then, right.then, scope),
                       term_precision(left.else_, right.else_, scope))
    if isinstance(left, Assert):
        if left.pred != right.pred:
            raise _mismatch(left, right)
        return term_precision(left.body, right.body, scope)
    raise _mismatch(left, right)


def program_precision(left, right):
    # type: (Program, Program) -> Verdict
    """Binding-wise `term_precision` of two parsed programs."""
    if [b.name for b in left.bindings] != [b.name for b in right.bindings]:
        raise StructureMismatch("the programs bind different names")
    return combine(*(term_precision(a.term, b.term) for a, b in zip(left.bindings, right.bindings)))


def _entails(env, path, pred):
    return check_validity(env.st(), conj(env.refine(), path), pred).verdict


def cast_precision(left, right, env=None, path=TRUE):
    # type: (Term, Term, TypeEnv, Expr) -> Verdict
    """
    Precision of two target terms: every assertion of `right` must
    follow from the context and the assertions `left` has made so far.
    An assertion only `left` makes is free.

    Raises:
        `StructureMismatch`: The terms differ in more than annotations and assertions.
    """
    env = env if env is not None else TypeEnv()
    if isinstance(left, Assert) and isinstance(right, Assert):
        after = conj(path, left.pred)
        return combine(_entails(env, after, right.pred),
                       cast_precision(left.body, right.body, env, after))
    if isinstance(left, Assert):
        return cast_precision(left.body, right, env, conj(path, left.pred))
    if isinstance(right, Assert):
        return combine(_entails(env, path, right.pred),
                       cast_precision(left, right.body, env, path))
    if isinstance(left, Annot) and isinstance(right, Annot):
        return combine(type_precision(left.ty, right.ty, env.st()),
                       cast_precision(left.term, right.term, env, path))
    if type(left) is not type(right):
        raise _mismatch(left, right)
    if isinstance(left, (Const, Ident, TensorVal)):
        if left != right:
            raise _mismatch(left, right)
        return Verdict.VALID
    if isinstance(left, (Prim, PrimVal)):
        return Verdict.VALID if left.name == right.name else Verdict.INVALID
    if isinstance(left, Lam):
        inner = env.extend(left.var, left.ann) if left.ann is not None else env
        return combine(_ann_precision(left.ann, right.ann, env.st()),
                       cast_precision(left.body, _rename(right.body, right.var, left.var), inner, path))
    if isinstance(left, Let):
        inner = env.extend(left.var, left.ann) if left.ann is not None else env
        return combine(_ann_precision(left.ann, right.ann, env.st()),
                       cast_precision(left.rhs, right.rhs, env, path),
                       cast_precision(left.body, _rename(right.body, right.var, left.var), inner, path))
    if isinstance(left, Fix):
        inner = env.extend(left.fn, left.ann) if left.ann is not None else env
        if isinstance(left.ann, Fun):
            inner = inner.extend(left.var, left.ann.dom)
        body = _rename(_rename(right.body, right.fn, left.fn), right.var, left.var)
        return combine(_ann_precision(left.ann, right.ann, env.st()),
                       cast_precision(left.body, body, inner, path))
    if isinstance(left, If):
        atom = value_expr(left.cond)
        then_path = conj(path, atom) if atom is not None else path
        else_path = conj(path, Not(atom)) if atom is not None else path
        return combine(cast_precision(left.cond, right.cond, env, path),
                       cast_precision(left.then, right.then, env, then_path),
                       cast_precision(left.else_, right.else_, env, else_path))
    if isinstance(left, App):
        return combine(cast_precision(left.fn, right.fn, env, path),
                       cast_precision(left.arg, right.arg, env, path))
    raise _mismatch(left, right)


def _rename(t, old, new):
    if old == new:
        return t
    return rename_term(t, {old: new})


def value_precision(left, right):
    # type: (Term, Term) -> Verdict
    """Base values must be equal; functions are compared as target terms."""
    if isinstance(left, (Const, TensorVal)) or isinstance(right, (Const, TensorVal)):
        return Verdict.VALID if left == right else Verdict.INVALID
    try:
        return cast_precision(left, right)
    except (StructureMismatch, ShapeMismatch):
        return Verdict.UNKNOWN


def _matches(term, candidates):
    seen = Verdict.INVALID
    for cand in candidates:
        try:
            verdict = cast_precision(*term(cand))
        except (StructureMismatch, ShapeMismatch):
            continue
        if verdict is Verdict.VALID:
            return verdict
        if verdict is Verdict.UNKNOWN:
            seen = verdict
    return seen


def reduction_left(left, right, lookahead=4):
    # type: (Term, Term, int) -> Verdict
    """
    One step of the more precise closed term `left` is matched by at
    most `lookahead` steps of `right`, the results still ordered.
    """
    steps = Evaluator().trace(left, 1)
    if len(steps) < 2:
        return Verdict.VALID
    after = steps[1]
    return _matches(lambda cand: (after, cand), Evaluator().trace(right, lookahead))


def reduction_right(left, right, lookahead=4):
    # type: (Term, Term, int) -> Verdict
    """
    One step of the less precise closed term `right` is matched by at
    most `lookahead` steps of `left`, or `left` blames.
    """
    steps = Evaluator().trace(right, 1)
    if len(steps) < 2:
        return Verdict.VALID
    if isinstance(Evaluator(lookahead).evaluate(left), Blame):
        return Verdict.VALID
    after = steps[1]
    return _matches(lambda cand: (cand, after), Evaluator().trace(left, lookahead))


#******************************************************************************
#                               Generator
#******************************************************************************

@dataclass
class PrecisionPair:
    """
    Two source programs built from the same skeleton; `left` carries
    every annotation in full, `right` a weakened copy of each.
    """
    seed: int
    left: str
    right: str
    shape: tuple = ()
    ops: list = field(default_factory=list)


def _dims(shape):
    return "[" + "; ".join(str(d) for d in shape) + "]"


def _describe(shape, rng):
    """Conjuncts pinning a tensor's shape down, in random order."""
    out = [f"len v.shape = {len(shape)}", f"v.shape = {_dims(shape)}"]
    if shape and rng.random() < 0.5:
        out.append(f"nth 0 v.shape = {shape[0]}")
    rng.shuffle(out)
    return out


def _step(rng, var, shape):
    """One random shape operation applicable to `shape`."""
    choices = ["relu", "add", "linear", "reshape", "forward", "rec"]
    if len(shape) == 2:
        choices.append("tr")
    if len(shape) == 1:
        choices.append("pool")
    choices.append("if")
    match rng.choice(choices):
        case "relu":
            return f"Tensor.relu {var}", shape
        case "forward":
            return f"Layer.forward Tensor.relu {var}", shape
        case "rec":
            return f"{_REC_NAME} {rng.randint(0, 2)} {var}", shape
        case "tr":
            return f"Tensor.tr {var}", (shape[1], shape[0])
        case "add":
            keep = rng.randint(1, len(shape))
            other = tuple(d if rng.random() < 0.7 else 1 for d in shape[-keep:])
            return f"Tensor.add {var} (Tensor.zeros {_dims(other)})", shape
        case "linear":
            out = rng.randint(1, 4)
            return f"Layer.linear {shape[-1]} {out} {var}", shape[:-1] + (out,)
        case "reshape":
            size = 1
            for d in shape:
                size *= d
            target = (size,)
            if len(shape) == 1 and size % 2 == 0 and size > 0:
                target = (2, size // 2)
            return f"Tensor.reshape {var} {_dims(target)}", target
        case "pool":
            k = rng.randint(1, 2)
            return f"Tensor.avg_pool1d {k} {var}", (shape[0] // k,)
        case _:
            return f"if 1 < 2 then Tensor.relu {var} else {var}", shape


_REC_NAME = "keep"
_REC_HELPER = (f"let rec {_REC_NAME} (n : int) (t : tensor) : tensor(t.shape) =\n"
               f"  if n = 0 then t else {_REC_NAME} (n - 1) t\n;;")


def _weaken(conjuncts, rng):
    """Keep, thin out or delete (None) an annotation's conjuncts."""
    roll = rng.random()
    if roll < 0.4:
        return list(conjuncts)
    if roll < 0.7:
        return [c for c in conjuncts if rng.random() < 0.5]
    return None


def _ann(conjuncts):
    return "{v:tensor | " + (" && ".join(conjuncts) if conjuncts else "true") + "}"


def gen_precision_pair(seed, size=3):
    # type: (int, int) -> PrecisionPair
    """
    A pair of programs `left ⊑ right`: a function chaining `size`
    random shape operations, annotated on its parameter, its result and
    some of its lets, applied once at top level. Some steps go through
    a recursive helper or pass a stub as a value.
    """
    rng = random.Random(seed)
    shape = tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 3)))
    if len(shape) == 1:
        shape = (rng.randint(2, 8),)
    slots = []
    lines, ops, cur, var = [], [], shape, "x"
    for i in range(1, size + 1):
        op, cur = _step(rng, var, cur)
        ops.append(op.split()[0] if not op.startswith("if") else "if")
        name = f"y{i}"
        slot = len(slots) if rng.random() < 0.4 else None
        if slot is not None:
            slots.append(_describe(cur, rng))
        lines.append((name, slot, op))
        var = name
    param = len(slots)
    slots.append(_describe(shape, rng))
    result = len(slots) if rng.random() < 0.7 else None
    if result is not None:
        slots.append(_describe(cur, rng))

    if len(shape) == 1 and rng.random() < 0.3:
        arg = f"load {shape[0] + rng.choice((0, 0, 1))}"
    else:
        arg = f"Tensor.zeros {_dims(shape)}"

    weak = [_weaken(s, rng) for s in slots]

    def render(anns):
        head = "let f " + ("x" if anns[param] is None else f"(x : {_ann(anns[param])})")
        if result is not None and anns[result] is not None:
            head += f" : {_ann(anns[result])}"
        out = [_REC_HELPER] if _REC_NAME in ops else []
        out.append(head + " =")
        for name, slot, op in lines:
            ann = "" if slot is None or anns[slot] is None else f" : {_ann(anns[slot])}"
            out.append(f"  let {name}{ann} = {op} in")
        out.append(f"  {var}\n;;")
        out.append(f"let _ = f ({arg})")
        return "\n".join(out) + "\n"

    return PrecisionPair(seed, render(slots), render(weak), shape, ops)


#******************************************************************************
#                            Guarantee checks
#******************************************************************************

@dataclass
class CaseResult:
    """
    Verdict of one pair. `status` is "skipped" (the left program is
    not accepted), "ok" or "failed"; `outcomes` names how both runs
    ended.
    """
    seed: int
    status: str
    reason: str = ""
    outcomes: tuple = ()
    record: dict = field(default_factory=dict)


def check_static_gg(left_report, right_report):
    # type: (Report, Report) -> str | None
    """
    `None` when the weaker program is accepted and each of its bindings
    is typed no more precisely than in the stronger one; otherwise
    the reason it is not.
    """
    if not right_report.accepted:
        messages = "; ".join(d.message for d in right_report.diagnostics if d.severity == "error")
        return f"weaker program {right_report.status}: {messages}"
    for name, ty in left_report.types.items():
        other = right_report.types.get(name)
        if other is None:
            continue
        try:
            verdict = type_precision(ty, other, assume_domain=True)
        except ShapeMismatch as exc:
            return f"{name}: {exc.message}"
        if verdict is Verdict.INVALID:
            return f"{name}: {print_type(ty)} is not more precise than {print_type(other)}"
    return None


def check_dynamic_gg(left, right):
    # type: (Outcome, Outcome) -> str | None
    """
    `None` when the outcomes are compatible: left blame allows
    anything, a value on the left needs a value at least as imprecise
    on the right, running out of fuel is inconclusive and getting
    stuck is always a failure.
    """
    if isinstance(left, Stuck) or isinstance(right, Stuck):
        stuck = left if isinstance(left, Stuck) else right
        return f"stuck: {stuck}"
    if isinstance(left, OutOfFuel) or isinstance(right, OutOfFuel):
        return None
    if isinstance(left, Blame):
        return None
    if isinstance(right, Blame):
        return f"weaker program blamed ({right}) where the stronger returned {left}"
    if value_precision(left.value, right.value) is Verdict.INVALID:
        return f"values differ: {show_value(left.value)} and {show_value(right.value)}"
    return None


def run_case(model, pair, fuel=None):
    # type: (Model, PrecisionPair, int) -> CaseResult
    """Check, elaborate and run both programs of `pair` and compare."""
    record = {"seed": pair.seed, "left": pair.left, "right": pair.right}
    left = model.check(pair.left, f"case-{pair.seed}-left")
    if not left.accepted:
        reason = "; ".join(d.message for d in left.diagnostics if d.severity == "error")
        return CaseResult(pair.seed, "skipped", reason)
    right = model.check(pair.right, f"case-{pair.seed}-right")
    record["left_elaborated"] = left.elaborated_text()
    record["right_elaborated"] = right.elaborated_text()
    record["left_types"] = {k: print_type(v) for k, v in left.types.items()}
    record["right_types"] = {k: print_type(v) for k, v in right.types.items()}

    reason = check_static_gg(left, right)
    if reason is None:
        if program_precision_safe(left.program, right.program) is Verdict.INVALID:
            reason = "generated pair is not ordered by precision"
    if reason is not None:
        record["reason"] = reason
        return CaseResult(pair.seed, "failed", reason, record=record)

    evaluator = Evaluator(fuel or model.settings.fuel)
    outcomes = (evaluator.evaluate(program_term(left.target)),
                evaluator.evaluate(program_term(right.target)))
    kinds = tuple(o.kind for o in outcomes)
    record["outcomes"] = [str(o) for o in outcomes]
    reason = check_dynamic_gg(*outcomes)
    if reason is not None:
        record["reason"] = reason
        return CaseResult(pair.seed, "failed", reason, kinds, record)
    return CaseResult(pair.seed, "ok", outcomes=kinds, record=record)


def program_precision_safe(left, right):
    """`program_precision`, with non-congruent programs counted as `INVALID`."""
    try:
        return program_precision(left, right)
    except StructureMismatch as exc:
        logger.warning("precision of generated pair: %s", exc.message)
        return Verdict.INVALID


@dataclass
class PropertyReport:
    """Totals of a `run_properties` session."""
    cases: int = 0
    ok: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    outcomes: Counter = field(default_factory=Counter)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            "cases": self.cases, "ok": self.ok, "skipped": self.skipped,
            "failed": len(self.failures),
            "failures": [{"seed": f.seed, "reason": f.reason} for f in self.failures],
            "outcomes": {" / ".join(k): v for k, v in self.outcomes.items()},
        }


def run_properties(model, cases=100, seed=0, fuel=None, size=3, failures_dir=None):
    # type: (Model, int, int, int, int, str) -> PropertyReport
    """
    Run `cases` generated pairs with consecutive seeds from `seed`,
    dumping each failure to `failures_dir` as JSON.
    """
    failures_dir = failures_dir or model.settings.failures_dir
    report = PropertyReport()
    for case_seed in range(seed, seed + cases):
        pair = gen_precision_pair(case_seed, size)
        result = run_case(model, pair, fuel)
        report.cases += 1
        if result.status == "skipped":
            report.skipped += 1
            logger.debug("case %d skipped: %s", case_seed, result.reason)
            continue
        if result.outcomes:
            report.outcomes[result.outcomes] += 1
        if result.status == "failed":
            report.failures.append(result)
            logger.warning("case %d failed: %s", case_seed, result.reason)
            fo.save_failure(failures_dir, case_seed, result.record)
        else:
            report.ok += 1
    logger.info("%d cases, %d ok, %d skipped, %d failed",
                report.cases, report.ok, report.skipped, len(report.failures))
    return report
