"""Pretty printer.

Renders predicates, types, terms and whole programs in the concrete
syntax accepted by `model.parser`. Parsing the output of `print_program`
gives back the same abstract syntax.
"""
from model.ast import (
    Add, And, Annot, App, Append, Assert, Base, BaseType, BoolConst, Broadcast,
    Broadcastable, Cons, Const, Div, DropAt, Eq, Fix, Fun, Head, Ident, If, Init,
    InsertAt, Lam, Last, Le, Len, Let, Lt, Matmul, Mul, Neg, Not, Nth, Num, Or,
    PredApp, Prim, PrimVal, Prod, Reshape, Reshapeable, ShapeList, ShapeOf, Swap,
    Tail, TensorVal, Var, free_vars, rename_term, type_free_vars, TRUE,
)

OPERATORS = {"+", "-", "*", "/", "=", "<>", "<", "<=", ">", ">=", "@", "::"}

# precedence levels, loosest first
_OR, _AND, _NOT, _CMP, _CONS, _ADD, _MUL, _NEG, _APP, _ATOM = range(1, 11)

_UNARY = {Head: "head", Last: "last", Len: "len", Prod: "prod", Tail: "tail", Init: "init"}
_CALLS = {
    InsertAt: "insertAt", DropAt: "dropAt", Swap: "swap", Reshape: "reshape",
    Broadcast: "broadcast", Matmul: "matmul", Broadcastable: "broadcastable",
    Reshapeable: "reshapeable",
}
_COMPARE = {Eq: "=", Le: "<=", Lt: "<"}


def print_expr(e):
    # type: (Expr) -> str
    return _expr(e, 0)


def _wrap(text, prec, ctx):
    return f"({text})" if prec < ctx else text


def _expr(e, ctx):
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Num):
        return _wrap(str(e.value), _NEG, ctx) if e.value < 0 else str(e.value)
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, ShapeOf):
        return f"{_expr(e.arg, _ATOM)}.shape"
    if isinstance(e, ShapeList):
        return "[" + "; ".join(_expr(i, 0) for i in e.items) + "]"
    if isinstance(e, PredApp):
        return f"{e.var.name}(" + ", ".join(_expr(a, 0) for a in e.args) + ")"
    if type(e) in _CALLS:
        args = [getattr(e, name) for name in e.__dataclass_fields__]
        return _CALLS[type(e)] + "(" + ", ".join(_expr(a, 0) for a in args) + ")"
    if type(e) in _UNARY:
        return _wrap(f"{_UNARY[type(e)]} {_expr(e.arg, _ATOM)}", _APP, ctx)
    if isinstance(e, Nth):
        return _wrap(f"nth {_expr(e.index, _ATOM)} {_expr(e.arg, _ATOM)}", _APP, ctx)
    if isinstance(e, Neg):
        inner = f"({e.arg.value})" if isinstance(e.arg, Num) else _expr(e.arg, _NEG)
        return _wrap(f"-{inner}", _NEG, ctx)
    if isinstance(e, Add):
        if isinstance(e.right, Neg):
            text = f"{_expr(e.left, _ADD)} - {_expr(e.right.arg, _MUL)}"
        else:
            text = f"{_expr(e.left, _ADD)} + {_expr(e.right, _MUL)}"
        return _wrap(text, _ADD, ctx)
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return _wrap(f"{_expr(e.left, _MUL)} {op} {_expr(e.right, _NEG)}", _MUL, ctx)
    if isinstance(e, (Cons, Append)):
        left, right = (e.head, e.tail) if isinstance(e, Cons) else (e.left, e.right)
        op = "::" if isinstance(e, Cons) else "@"
        return _wrap(f"{_expr(left, _ADD)} {op} {_expr(right, _CONS)}", _CONS, ctx)
    if isinstance(e, Not) and isinstance(e.arg, Eq):
        return _wrap(f"{_expr(e.arg.left, _CONS)} <> {_expr(e.arg.right, _CONS)}", _CMP, ctx)
    if type(e) in _COMPARE:
        return _wrap(f"{_expr(e.left, _CONS)} {_COMPARE[type(e)]} {_expr(e.right, _CONS)}", _CMP, ctx)
    if isinstance(e, Not):
        return _wrap(f"not {_expr(e.arg, _NOT)}", _NOT, ctx)
    if isinstance(e, And):
        return _wrap(f"{_expr(e.left, _NOT)} && {_expr(e.right, _AND)}", _AND, ctx)
    if isinstance(e, Or):
        return _wrap(f"{_expr(e.left, _AND)} || {_expr(e.right, _OR)}", _OR, ctx)
    raise TypeError(f"cannot print {e!r}")


#******************************************************************************
#                                  Types
#******************************************************************************

def print_type(t):
    # type: (RType) -> str
    if isinstance(t, Base):
        return _base(t)
    dom = print_type(t.dom)
    if isinstance(t.dom, Fun):
        dom = f"({dom})"
    cod = print_type(t.cod)
    if t.var.startswith("_") and t.var not in type_free_vars(t.cod):
        return f"{dom} -> {cod}"
    return f"{t.var}:{dom} -> {cod}"


def _base(t):
    if t.var == "v":
        if t.pred == TRUE:
            return str(t.base)
        pred = t.pred
        if (t.base is BaseType.TENSOR and isinstance(pred, Eq)
                and pred.left == ShapeOf(Var("v")) and "v" not in free_vars(pred.right)):
            return f"tensor({print_expr(pred.right)})"
    return f"{{{t.var}:{t.base} | {print_expr(t.pred)}}}"


def print_stub(stub):
    """`val name : [forall ...] type` for a parsed stub declaration."""
    name = _name(stub.name)
    quant = ""
    if stub.shape_params:
        quant = "forall " + " ".join(stub.shape_params) + ". "
    elif stub.pred_params:
        quant = "forall " + " ".join(f"{b}:bool" for b in stub.pred_params) + ". "
    return f"val {name} : {quant}{print_type(stub.ty)}"


#******************************************************************************
#                                  Terms
#******************************************************************************

def print_term(t, indent=0):
    # type: (Term, int) -> str
    return _term(t, indent, 0)


_LOOSE, _TAPP, _TATOM = 0, 1, 2


def _const(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return "[" + "; ".join(str(v) for v in value) + "]"


def _name(name):
    if name == "*":
        return "( * )"
    return f"({name})" if name in OPERATORS else name


def _term(t, ind, ctx):
    pad = " " * ind
    if isinstance(t, Const):
        text = _const(t.value)
        return f"({text})" if text.startswith("-") and ctx > _LOOSE else text
    if isinstance(t, Ident):
        return _name(t.name)
    if isinstance(t, Prim):
        return _name(t.name)
    if isinstance(t, TensorVal):
        return "<tensor " + _const(t.shape) + ">"
    if isinstance(t, Annot):
        return f"({_term(t.term, ind, _LOOSE)} : {print_type(t.ty)})"
    if isinstance(t, PrimVal):
        text = " ".join([_name(t.name)] + [_term(a, ind, _TATOM) for a in t.args])
        return f"({text})" if ctx > _LOOSE and t.args else text
    if isinstance(t, App):
        text = f"{_term(t.fn, ind, _TAPP)} {_term(t.arg, ind, _TATOM)}"
        return f"({text})" if ctx > _TAPP else text
    if isinstance(t, Lam):
        binder = f"({t.var} : {print_type(t.ann)})" if t.ann is not None else t.var
        text = f"fun {binder} -> {_block(t.body, ind + 2)}"
    elif isinstance(t, Let):
        if isinstance(t.rhs, Fix):
            head = f"let rec {t.var}"
            fix = _named(t.rhs, t.var)
            if fix.ann is not None:
                head += f" : {print_type(fix.ann)}"
            rhs = f"fun {fix.var} -> {_block(fix.body, ind + 2)}"
        else:
            head = f"let {t.var}"
            if t.ann is not None:
                head += f" : {print_type(t.ann)}"
            rhs = _term(t.rhs, ind + 2, _LOOSE)
        text = f"{head} = {rhs} in\n{pad}{_term(t.body, ind, _LOOSE)}"
    elif isinstance(t, Fix):
        ann = f" : {print_type(t.ann)}" if t.ann is not None else ""
        text = f"let rec {t.fn}{ann} = fun {t.var} -> {_block(t.body, ind + 2)} in {t.fn}"
    elif isinstance(t, If):
        text = (f"if {_term(t.cond, ind, _TAPP)}\n{pad}then {_term(t.then, ind + 2, _LOOSE)}"
                f"\n{pad}else {_term(t.else_, ind + 2, _LOOSE)}")
    elif isinstance(t, Assert):
        text = f"assert ({print_expr(t.pred)});\n{pad}{_term(t.body, ind, _LOOSE)}"
    else:
        raise TypeError(f"cannot print {t!r}")
    return f"({text})" if ctx > _LOOSE else text


def _named(fix, name):
    """`fix` with its recursive name replaced by the name of the binding holding it."""
    if fix.fn == name:
        return fix
    return Fix(name, fix.ann, fix.var, rename_term(fix.body, {fix.fn: name}), span=fix.span)


def _block(body, ind):
    if isinstance(body, (Let, Assert, If)):
        return "\n" + " " * ind + _term(body, ind, _LOOSE)
    return _term(body, ind, _LOOSE)


def print_program(program):
    # type: (Program) -> str
    """Stubs first, then one `let` per top-level binding, `;;`-separated."""
    parts = [print_stub(s) for s in program.stubs]
    for binding in program.bindings:
        term = binding.term
        if isinstance(term, Fix) and not binding.is_main:
            term = _named(term, binding.name)
            ann = f" : {print_type(term.ann)}" if term.ann is not None else ""
            text = f"let rec {binding.name}{ann} = fun {term.var} -> {_block(term.body, 2)}"
        else:
            name = "_" if binding.is_main else binding.name
            text = f"let {name} = {_term(term, 2, _LOOSE)}"
        parts.append(text + "\n;;")
    return "\n".join(parts) + "\n"


def print_witness(witness):
    # type: (dict) -> str
    if not witness:
        return ""
    items = []
    for name, value in witness.items():
        items.append(f"{name} = {_const(value)}")
    return ", ".join(items)
