"""Runtime module.

Small-step evaluator for target programs. Tensors are represented by
their shape only. Primitives are run from a table of shape functions;
stubs missing from the table are run from their signature.
"""
import logging
from dataclasses import dataclass, field

from model.ast import (
    Annot, App, Assert, Base, BaseType, Const, Eq, Fix, Fun, Ident, If, Lam, Let,
    Prim, PrimVal, ShapeOf, TensorVal, Var, conjuncts, free_vars, is_value,
    subst_term, subst_term_many,
)
from model.errors import EvalError
from model.logic import (
    broadcast_shape, eval_expr, int_div, matmul_shape, reshape_shape, simplify,
)
from model.printer import print_expr, print_term

logger = logging.getLogger(__name__)


#******************************************************************************
#                                 Outcomes
#******************************************************************************

@dataclass
class Outcome:
    steps: int = field(default=0, kw_only=True)

    @property
    def kind(self):
        return type(self).__name__.lower()


@dataclass
class Value(Outcome):
    value: object

    def __str__(self):
        return show_value(self.value)


@dataclass
class Blame(Outcome):
    """
    A failed assertion or a failed primitive.

    `operands` maps the variables of the source predicate to their
    values at the time of failure.
    """
    span: object
    pred: object = None
    operands: dict = field(default_factory=dict)
    reason: str = ""

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        if self.pred is not None:
            text = f"{where}assertion failed: {print_expr(self.pred)}"
        else:
            text = f"{where}{self.reason}"
        if self.operands:
            text += " with " + ", ".join(f"{k} = {show_value(v)}" for k, v in self.operands.items())
        return text


@dataclass
class OutOfFuel(Outcome):

    def __str__(self):
        return f"out of fuel after {self.steps} steps"


@dataclass
class Stuck(Outcome):
    """No reduction rule applies: a primitive was used outside its signature."""
    term: object
    reason: str = ""

    def __str__(self):
        return f"stuck ({self.reason}): {print_term(self.term)}"


def show_value(v):
    if isinstance(v, Const):
        value = v.value
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        return "[" + "; ".join(str(d) for d in value) + "]"
    if isinstance(v, TensorVal):
        return "tensor[" + "; ".join(str(d) for d in v.shape) + "]"
    if isinstance(v, (tuple, list)):
        return "[" + "; ".join(str(d) for d in v) + "]"
    if isinstance(v, (bool, int)):
        return str(v).lower() if isinstance(v, bool) else str(v)
    if isinstance(v, (Lam, Fix)):
        return "<fun>"
    if isinstance(v, (Prim, PrimVal)):
        return f"<{v.name}>"
    return str(v)


class _Blame(Exception):

    def __init__(self, outcome):
        super().__init__(str(outcome))
        self.outcome = outcome


class _Stuck(Exception):
    pass


#******************************************************************************
#                               Primitives
#******************************************************************************

def _shape(v, name):
    if not isinstance(v, TensorVal):
        raise _Stuck(f"{name} expects a tensor")
    return v.shape


def _ints(v, name):
    if not isinstance(v, Const) or not isinstance(v.value, tuple):
        raise _Stuck(f"{name} expects an int list")
    return v.value


def _int(v, name):
    if not isinstance(v, Const) or isinstance(v.value, bool) or not isinstance(v.value, int):
        raise _Stuck(f"{name} expects an int")
    return v.value


def tensor(shape):
    if any(d < 0 for d in shape):
        raise EvalError(f"negative dimension in {list(shape)}")
    return TensorVal(tuple(int(d) for d in shape))


def _tr(x):
    s = _shape(x, "Tensor.tr")
    if len(s) != 2:
        raise EvalError(f"transpose of a rank-{len(s)} tensor")
    return tensor((s[1], s[0]))


def _cat(x, y, d):
    s, t, i = _shape(x, "Tensor.cat_"), _shape(y, "Tensor.cat_"), _int(d, "Tensor.cat_")
    if len(s) != len(t) or not 0 <= i < len(s):
        raise EvalError(f"cannot concatenate {list(s)} and {list(t)} along {i}")
    if s[:i] + s[i + 1:] != t[:i] + t[i + 1:]:
        raise EvalError(f"cannot concatenate {list(s)} and {list(t)} along {i}")
    return tensor(s[:i] + (s[i] + t[i],) + s[i + 1:])


def _stack(x, y):
    s, t = _shape(x, "Tensor.stack"), _shape(y, "Tensor.stack")
    if s != t:
        raise EvalError(f"cannot stack {list(s)} and {list(t)}")
    return tensor((2,) + s)


def _avg_pool1d(k, x):
    size, s = _int(k, "Tensor.avg_pool1d"), _shape(x, "Tensor.avg_pool1d")
    if size <= 0 or len(s) != 1:
        raise EvalError(f"cannot pool {list(s)} with kernel {size}")
    return tensor((s[0] // size,))


def _linear(i, o, x):
    s = _shape(x, "Layer.linear")
    if not s or s[-1] != _int(i, "Layer.linear"):
        raise EvalError(f"linear layer of input size {i.value} applied to {list(s)}")
    return tensor(s[:-1] + (_int(o, "Layer.linear"),))


def _nth(l, i):
    items, index = _ints(l, "List.nth"), _int(i, "List.nth")
    if not 0 <= index < len(items):
        raise EvalError(f"index {index} out of range for {list(items)}")
    return Const(items[index])


def _int_op(fn):
    return lambda x, y: Const(fn(_int(x, "arithmetic"), _int(y, "arithmetic")))


#: Primitive name to shape function over argument values.
BUILTINS = {
    "+": _int_op(lambda a, b: a + b),
    "-": _int_op(lambda a, b: a - b),
    "*": _int_op(lambda a, b: a * b),
    "/": _int_op(int_div),
    "=": _int_op(lambda a, b: a == b),
    "<>": _int_op(lambda a, b: a != b),
    "<": _int_op(lambda a, b: a < b),
    "<=": _int_op(lambda a, b: a <= b),
    ">": _int_op(lambda a, b: a > b),
    ">=": _int_op(lambda a, b: a >= b),
    "List.length": lambda l: Const(len(_ints(l, "List.length"))),
    "List.nth": _nth,
    "Tensor.zeros": lambda s: tensor(_ints(s, "Tensor.zeros")),
    "Tensor.ones": lambda s: tensor(_ints(s, "Tensor.ones")),
    "Tensor.rand": lambda s: tensor(_ints(s, "Tensor.rand")),
    "load": lambda n: tensor((abs(_int(n, "load")),)),
    "Tensor.shape": lambda x: Const(_shape(x, "Tensor.shape")),
    "Tensor.reshape": lambda x, s: tensor(reshape_shape(_shape(x, "Tensor.reshape"),
                                                         _ints(s, "Tensor.reshape"))),
    "Tensor.tr": _tr,
    "Tensor.cat_": _cat,
    "Tensor.stack": _stack,
    "Tensor.add": lambda x, y: tensor(broadcast_shape(_shape(x, "Tensor.add"), _shape(y, "Tensor.add"))),
    "Tensor.sub": lambda x, y: tensor(broadcast_shape(_shape(x, "Tensor.sub"), _shape(y, "Tensor.sub"))),
    "Tensor.mul": lambda x, y: tensor(broadcast_shape(_shape(x, "Tensor.mul"), _shape(y, "Tensor.mul"))),
    "Tensor.matmul": lambda x, y: tensor(matmul_shape(_shape(x, "Tensor.matmul"),
                                                       _shape(y, "Tensor.matmul"))),
    "Tensor.relu": lambda x: x,
    "Tensor.avg_pool1d": _avg_pool1d,
    "Layer.linear": _linear,
    "Layer.id": lambda x: x,
    "Layer.forward": lambda f, x: App(f, x),
    "Layer.of_fn": lambda f, x: App(f, x),
}


def arity(ty):
    n = 0
    while isinstance(ty, Fun):
        n += 1
        ty = ty.cod
    return n


def _assignment(value):
    if isinstance(value, TensorVal):
        return value.shape
    if isinstance(value, Const):
        return value.value
    return None


def _from_signature(name, ty, args):
    """
    Run a stub without a table entry: check the domain refinements on
    the arguments, then compute the result from a singleton codomain.
    """
    env = {}
    for arg in args:
        if not isinstance(ty.dom, Base):
            ty = ty.cod
            continue
        value = _assignment(arg)
        env[ty.var] = value
        check = dict(env)
        check[ty.dom.var] = value
        try:
            ok = eval_expr(ty.dom.pred, check)
        except EvalError as exc:
            raise EvalError(f"{name}: {exc.kind}") from exc
        if not ok:
            raise EvalError(f"{name}: argument {show_value(arg)} violates {print_expr(ty.dom.pred)}")
        ty = ty.cod
    if not isinstance(ty, Base):
        raise _Stuck(f"{name} returns a function")
    own = ShapeOf(Var(ty.var)) if ty.base is BaseType.TENSOR else Var(ty.var)
    for atom in conjuncts(ty.pred):
        if not isinstance(atom, Eq):
            continue
        for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
            if side == own and ty.var not in free_vars(other):
                value = eval_expr(other, env)
                return tensor(value) if ty.base is BaseType.TENSOR else Const(value)
    raise EvalError(f"{name} has no computable result")


def ev(prim, args):
    # type: (Prim | PrimVal, tuple) -> Term
    """
    Result of a saturated primitive call.

    Raises:
        `EvalError`: The arguments are outside the primitive's domain.
    """
    fn = BUILTINS.get(prim.name)
    if fn is not None:
        return fn(*args)
    if prim.ty is None:
        raise _Stuck(f"unknown primitive {prim.name}")
    return _from_signature(prim.name, prim.ty, args)


#******************************************************************************
#                               Reduction
#******************************************************************************

class Evaluator:
    """
    Small-step reduction under the contexts `[] N`, `v []` and
    `let x = [] in N`.

    Args:
        `fuel`: Maximum number of steps.
    """

    def __init__(self, fuel=1_000_000):
        self.fuel = fuel

    def step(self, t):
        # type: (Term) -> Term
        """
        One reduction of closed term `t`.

        Raises:
            `_Blame`: An assertion or a primitive failed.

            `_Stuck`: No rule applies.
        """
        if isinstance(t, Assert):
            pred = simplify(t.pred)
            try:
                ok = eval_expr(pred, {})
            except EvalError as exc:
                raise _Blame(Blame(t.span, t.pred, reason=exc.kind)) from exc
            if not ok:
                raise _Blame(Blame(t.span, t.pred, _ground_operands(t.pred)))
            return t.body
        if isinstance(t, Let):
            if is_value(t.rhs):
                return subst_term(t.rhs, t.var, t.body)
            return Let(t.var, self.step(t.rhs), t.body, t.ann, t.scope, span=t.span, stype=t.stype)
        if isinstance(t, If):
            if not isinstance(t.cond, Const) or not isinstance(t.cond.value, bool):
                raise _Stuck("condition is not a boolean")
            return t.then if t.cond.value else t.else_
        if isinstance(t, Annot):
            return t.term
        if isinstance(t, App):
            if not is_value(t.fn):
                return App(self.step(t.fn), t.arg, span=t.span, stype=t.stype)
            if not is_value(t.arg):
                return App(t.fn, self.step(t.arg), span=t.span, stype=t.stype)
            return self._apply(t.fn, t.arg, t.span)
        if isinstance(t, Fix):
            raise _Stuck("recursive function in reduction position")
        raise _Stuck(f"no rule for {type(t).__name__}")

    def _apply(self, fn, arg, span):
        if isinstance(arg, Ident) or isinstance(fn, Ident):
            raise _Stuck("free variable")
        if isinstance(fn, Lam):
            return subst_term(arg, fn.var, fn.body)
        if isinstance(fn, Fix):
            return subst_term_many(fn.body, {fn.fn: fn, fn.var: arg})
        if isinstance(fn, (Prim, PrimVal)):
            args = (fn.args if isinstance(fn, PrimVal) else ()) + (arg,)
            if len(args) < _prim_arity(fn):
                return PrimVal(fn.name, args, fn.ty, span=fn.span)
            try:
                return ev(fn, args)
            except EvalError as exc:
                raise _Blame(Blame(span, reason=exc.message)) from exc
        raise _Stuck(f"applying {show_value(fn)}")

    def evaluate(self, t):
        # type: (Term) -> Outcome
        """Reduce `t` until it is a value, blames, gets stuck or runs out of fuel."""
        steps = 0
        while not is_value(t) or isinstance(t, Ident):
            if isinstance(t, Ident):
                return Stuck(t, f"free variable {t.name}", steps=steps)
            if steps >= self.fuel:
                return OutOfFuel(steps=steps)
            try:
                t = self.step(t)
            except _Blame as exc:
                exc.outcome.steps = steps
                return exc.outcome
            except _Stuck as exc:
                return Stuck(t, str(exc), steps=steps)
            steps += 1
        return Value(t, steps=steps)

    def trace(self, t, limit=50):
        """The terms of the first `limit` steps of `t`, `t` included."""
        out = [t]
        for _ in range(limit):
            if is_value(t):
                break
            try:
                t = self.step(t)
            except (_Blame, _Stuck):
                break
            out.append(t)
        return out


def _prim_arity(prim):
    if prim.ty is not None:
        return arity(prim.ty)
    fn = BUILTINS.get(prim.name)
    return fn.__code__.co_argcount if fn is not None else 1


def _ground_operands(pred):
    """Values of the ground shape and size subterms of a failed predicate."""
    out = {}
    for atom in conjuncts(pred):
        for side in getattr(atom, "__dataclass_fields__", {}):
            sub = getattr(atom, side)
            try:
                value = eval_expr(sub, {})
            except (EvalError, TypeError, AttributeError):
                continue
            if not isinstance(value, bool):
                out[print_expr(sub)] = value
    return out


def evaluate(t, fuel=1_000_000):
    # type: (Term, int) -> Outcome
    return Evaluator(fuel).evaluate(t)


#******************************************************************************
#                                Programs
#******************************************************************************

def program_term(program, args=()):
    # type: (Program, Iterable[Term]) -> Term
    """
    The closed term run by `run`: the program's main expression, or its
    last binding applied to `args`.
    """
    body = program.as_term()
    if args:
        last = program.bindings[-1].name
        call = Ident(last)
        for arg in args:
            call = App(call, arg)
        body = _replace_result(body, call)
    return body


def _replace_result(t, new):
    if isinstance(t, Let):
        return Let(t.var, t.rhs, _replace_result(t.body, new), t.ann, t.scope, span=t.span)
    return new


def parse_value(text):
    # type: (str) -> Term
    """
    A command-line argument as a value: `2`, `-1`, `true`, `[1;2]` or
    `tensor[20]`.

    Raises:
        `ValueError`: Not one of these forms.
    """
    text = text.strip()
    if text in ("true", "false"):
        return Const(text == "true")
    if text.startswith("tensor"):
        shape = _list(text[len("tensor"):])
        if any(d < 0 for d in shape):
            raise ValueError(f"negative dimension in {text}")
        return tensor(shape)
    if text.startswith("["):
        return Const(_list(text))
    return Const(int(text))


def _list(text):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"not a list: {text}")
    inner = text[1:-1].strip()
    if not inner:
        return ()
    return tuple(int(item) for item in inner.split(";"))
