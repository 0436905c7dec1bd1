"""Parser module.

Recursive-descent parser for programs (`.gt`) and stub files (`.gti`).
Programs come out in A-normal form: every application operand and every
`if` condition is a variable, non-variable operands being hoisted into
fresh `let` bindings. Shadowing binders are then renamed apart so that
every binder of a program is unique.
"""
from dataclasses import dataclass, field

from model.ast import (
    Add, And, Annot, App, Append, Assert, Base, BaseType, BoolConst, Broadcast,
    Broadcastable, Cons, Const, Div, DropAt, Eq, Fix, Fun, Head, Ident, If, Init,
    InsertAt, Lam, Last, Le, Len, Let, Lt, Matmul, Mul, Neg, Not, Nth, Num, Or,
    Prod, Reshape, Reshapeable, ShapeList, ShapeOf, Span, Swap, Tail, Var, TRUE,
    subst_expr, subst_type,
)
from model.errors import ParseError
from model.sorts import wf_type
from model.tools.tokenizer import Lexer
from utils.fresh import NameSupply, fresh_name

TERM_OPERATORS = ("=", "<>", "<", "<=", ">", ">=", "+", "-", "*", "/")
STUB_OPERATORS = TERM_OPERATORS + ("@", "::", "&&", "||")

_UNARY = {"len": Len, "head": Head, "last": Last, "prod": Prod, "tail": Tail, "init": Init}
_CALLS = {
    "insertAt": (InsertAt, 3), "dropAt": (DropAt, 2), "swap": (Swap, 3),
    "reshape": (Reshape, 2), "broadcast": (Broadcast, 2), "matmul": (Matmul, 2),
    "broadcastable": (Broadcastable, 2), "reshapeable": (Reshapeable, 2),
    "append": (Append, 2),
}
_BASE_WORDS = {"int", "bool", "tensor"}


@dataclass
class StubDecl:
    """
    Signature of a library function.

    `shape_params` lists the names of a `forall S1 S2.` prefix;
    `pred_params` the names of a `forall b1:bool b2:bool.` prefix.
    """
    name: str
    ty: object
    shape_params: tuple = ()
    pred_params: tuple = ()
    span: Span = None


@dataclass
class TopBinding:
    name: str
    term: object
    span: Span = None
    is_main: bool = False


@dataclass
class Program:
    """Top-level bindings in order, the last one possibly the main expression."""
    bindings: list
    stubs: list = field(default_factory=list)

    def names(self):
        return [b.name for b in self.bindings]

    def as_term(self):
        # type: () -> Term
        """The program as nested lets whose body is the last binding's name."""
        if not self.bindings:
            raise ParseError("empty program")
        last = self.bindings[-1]
        out = Ident(last.name, span=last.span)
        for binding in reversed(self.bindings):
            out = Let(binding.name, binding.term, out, span=binding.span)
        return out


#******************************************************************************
#                                 Parser
#******************************************************************************

class Parser:
    """
    Parser over the token list of one source text.
    """

    def __init__(self, text, lexer=None):
        self.lexer = lexer if lexer else Lexer()
        self.tokens = self.lexer.lex(text)
        self.pos = 0
        idents = {t.text for t in self.tokens if t.kind == "IDENT"}
        self.temps = NameSupply("t", idents)

    #**************
    #*   Tokens   *
    #**************

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, k=1):
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, *texts):
        return self.tok.kind in ("SYM", "KW", "IDENT") and self.tok.text in texts

    def advance(self):
        tok = self.tok
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, text):
        if not self.at(text):
            self.fail(text)
        return self.advance()

    def ident(self):
        if self.tok.kind != "IDENT":
            self.fail("identifier")
        return self.advance().text

    def fail(self, *expected):
        raise ParseError(f"unexpected {self.tok}" + (f", expected {' or '.join(expected)}" if expected else ""),
                         self.tok.span, expected)

    #**************
    #*  Programs  *
    #**************

    def program(self):
        # type: () -> Program
        stubs, bindings = [], []
        while self.tok.kind != "EOF":
            if self.at(";;"):
                self.advance()
            elif self.at("val"):
                stubs.append(self.stub())
            elif self.at("let"):
                bindings.append(self.top_binding({b.name for b in bindings}))
            else:
                bindings.append(self._main(self.expr(), {b.name for b in bindings}))
        names = [b.name for b in bindings]
        for i, name in enumerate(names):
            if name in names[:i]:
                raise ParseError(f"duplicate top-level name {name}", bindings[i].span)
        return Program(bindings, stubs)

    def _main(self, term, taken):
        name = fresh_name("main", taken | self.temps.avoid)
        self.temps.reserve({name})
        return TopBinding(name, term, term.span, is_main=True)

    def top_binding(self, taken):
        span = self.expect("let").span
        rec = bool(self.at("rec") and self.advance())
        if self.at("_"):
            self.advance()
            name = None
        else:
            name = self.ident()
        params = self.params()
        result = self.type() if self.at(":") and self.advance() else None
        self.expect("=")
        rhs = self.expr()
        term = self._binding_term(name, rec, params, result, rhs, span)
        if self.at("in"):
            self.advance()
            body = self.expr()
            return self._main(Let(name or "_", term, body, span=span), taken)
        if name is None:
            return self._main(term, taken)
        return TopBinding(name, term, span)

    def params(self):
        out = []
        while True:
            if self.tok.kind == "IDENT":
                out.append((self.advance().text, None))
            elif self.at("(") and self.peek().kind == "IDENT" and self.peek(2).text == ":":
                self.advance()
                name = self.ident()
                self.expect(":")
                ty = self.type()
                self.expect(")")
                out.append((name, ty))
            else:
                return out

    def _binding_term(self, name, rec, params, result, rhs, span):
        if not rec:
            body = Annot(rhs, result, span=rhs.span) if result is not None else rhs
            for pname, pty in reversed(params):
                body = Lam(pname, pty, body, span=span)
            return body
        if name is None:
            raise ParseError("let rec needs a name", span)
        if not params:
            if not isinstance(rhs, Lam):
                raise ParseError("let rec must bind a function", span)
            return Fix(name, result, rhs.var, rhs.body, span=span)
        (first, first_ty), rest = params[0], params[1:]
        body = rhs
        for pname, pty in reversed(rest):
            body = Lam(pname, pty, body, span=span)
        ann = None
        if result is not None and all(pty is not None for _, pty in params):
            ann = result
            for pname, pty in reversed(params):
                ann = Fun(pname, pty, ann)
        return Fix(name, ann, first, body, span=span)

    #**************
    #*   Stubs    *
    #**************

    def stubs(self):
        out = []
        while self.tok.kind != "EOF":
            if self.at(";;"):
                self.advance()
                continue
            out.append(self.stub())
        return out

    def stub(self):
        span = self.expect("val").span
        if self.at("("):
            self.advance()
            if self.tok.text not in STUB_OPERATORS:
                self.fail("operator")
            name = self.advance().text
            self.expect(")")
        else:
            name = self.ident()
        self.expect(":")
        shape_params, pred_params = (), ()
        if self.at("forall"):
            self.advance()
            names, bools = [], []
            while self.tok.kind == "IDENT":
                n = self.advance().text
                if self.at(":"):
                    self.advance()
                    if self.ident() != "bool":
                        self.fail("bool")
                    bools.append(n)
                else:
                    names.append(n)
            self.expect(".")
            if names and bools:
                raise ParseError("cannot mix shape and predicate parameters", span)
            shape_params, pred_params = tuple(names), tuple(bools)
        ty = self.type()
        return StubDecl(name, ty, shape_params, pred_params, span)

    #**************
    #*   Terms    *
    #**************

    def expr(self):
        span = self.tok.span
        if self.at("let"):
            self.advance()
            rec = bool(self.at("rec") and self.advance())
            name = self.ident()
            params = self.params()
            result = self.type() if self.at(":") and self.advance() else None
            self.expect("=")
            if self.at("in"):
                self.fail("expression")
            rhs = self.expr()
            self.expect("in")
            body = self.expr()
            rhs = self._binding_term(name, rec, params, result, rhs, span)
            return Let(name, rhs, body, span=span)
        if self.at("fun"):
            self.advance()
            params = self.params()
            if not params:
                self.fail("parameter")
            self.expect("->")
            body = self.expr()
            for name, ty in reversed(params):
                body = Lam(name, ty, body, span=span)
            return body
        if self.at("if"):
            self.advance()
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return If(cond, then, self.expr(), span=span)
        if self.at("assert"):
            self.advance()
            self.expect("(")
            pred = self.pred()
            self.expect(")")
            self.expect(";")
            return Assert(pred, self.expr(), span=span)
        return self.compare()

    def _binop(self, op, left, right, span):
        return App(App(Ident(op, span=span), left, span=span), right, span=span)

    def compare(self):
        left = self.additive()
        if self.at("=", "<>", "<", "<=", ">", ">="):
            tok = self.advance()
            left = self._binop(tok.text, left, self.additive(), tok.span)
        return left

    def additive(self):
        left = self.multiplicative()
        while self.at("+", "-"):
            tok = self.advance()
            left = self._binop(tok.text, left, self.multiplicative(), tok.span)
        return left

    def multiplicative(self):
        left = self.application()
        while self.at("*", "/"):
            tok = self.advance()
            left = self._binop(tok.text, left, self.application(), tok.span)
        return left

    def _starts_atom(self):
        tok = self.tok
        if tok.kind in ("NUM", "IDENT"):
            return tok.text not in _BASE_WORDS
        return tok.text in ("(", "[", "true", "false")

    def application(self):
        if self.at("-") and self.peek().kind == "NUM":
            tok = self.advance()
            return Const(-int(self.advance().text), span=tok.span)
        term = self.atom()
        while self._starts_atom():
            arg = self.atom()
            term = App(term, arg, span=term.span)
        return term

    def atom(self):
        tok = self.tok
        if tok.kind == "NUM":
            self.advance()
            return Const(int(tok.text), span=tok.span)
        if self.at("true", "false"):
            self.advance()
            return Const(tok.text == "true", span=tok.span)
        if tok.kind == "IDENT" and tok.text not in _BASE_WORDS:
            self.advance()
            return Ident(tok.text, span=tok.span)
        if self.at("["):
            self.advance()
            items = []
            while not self.at("]"):
                negative = bool(self.at("-") and self.advance())
                if self.tok.kind != "NUM":
                    self.fail("integer")
                value = int(self.advance().text)
                items.append(-value if negative else value)
                if not self.at("]"):
                    self.expect(";")
            self.advance()
            return Const(tuple(items), span=tok.span)
        if self.at("("):
            self.advance()
            if self.tok.text in TERM_OPERATORS and self.peek().text == ")":
                op = self.advance().text
                self.advance()
                return Ident(op, span=tok.span)
            if self.at("-") and self.peek().kind == "NUM" and self.peek(2).text == ")":
                self.advance()
                value = -int(self.advance().text)
                self.advance()
                return Const(value, span=tok.span)
            inner = self.expr()
            if self.at(":"):
                self.advance()
                ty = self.type()
                self.expect(")")
                return Annot(inner, ty, span=tok.span)
            self.expect(")")
            return inner
        self.fail("expression")

    #**************
    #*   Types    *
    #**************

    def type(self):
        # type: () -> RType
        binder = None
        if self.at("~"):
            self.advance()
        if self.tok.kind == "IDENT" and self.peek().text == ":":
            binder = self.advance().text
            self.advance()
        dom = self.type_atom()
        if not self.at("->"):
            return dom
        self.advance()
        cod = self.type()
        return Fun(binder or "_", dom, cod)

    def base_word(self):
        word = self.ident()
        if word == "int":
            if self.tok.kind == "IDENT" and self.tok.text == "list":
                self.advance()
                return BaseType.INT_LIST
            return BaseType.INT
        if word == "bool":
            return BaseType.BOOL
        if word == "tensor":
            return BaseType.TENSOR
        raise ParseError(f"unknown base type {word}", self.tokens[self.pos - 1].span,
                         ("int", "int list", "bool", "tensor"))

    def type_atom(self):
        if self.at("("):
            self.advance()
            ty = self.type()
            self.expect(")")
            return ty
        if self.at("{"):
            self.advance()
            var = self.ident()
            self.expect(":")
            base = self.base_word()
            self.expect("|")
            pred = self.pred()
            self.expect("}")
            return Base(var, base, pred)
        base = self.base_word()
        if base is BaseType.TENSOR and self.at("("):
            self.advance()
            shape = self.pred()
            self.expect(")")
            return Base("v", base, Eq(ShapeOf(Var("v")), shape))
        return Base("v", base, TRUE)

    #**************
    #* Predicates *
    #**************

    def pred(self):
        left = self.pred_and()
        if self.at("||"):
            self.advance()
            return Or(left, self.pred())
        return left

    def pred_and(self):
        left = self.pred_not()
        if self.at("&&"):
            self.advance()
            return And(left, self.pred_and())
        return left

    def pred_not(self):
        if self.at("not"):
            self.advance()
            return Not(self.pred_not())
        return self.pred_cmp()

    def pred_cmp(self):
        left = self.pred_cons()
        if not self.at("=", "<>", "!=", "<", "<=", ">", ">="):
            return left
        op = self.advance().text
        right = self.pred_cons()
        if op == "=":
            return Eq(left, right)
        if op in ("<>", "!="):
            return Not(Eq(left, right))
        if op == "<":
            return Lt(left, right)
        if op == "<=":
            return Le(left, right)
        if op == ">":
            return Lt(right, left)
        return Le(right, left)

    def pred_cons(self):
        left = self.pred_add()
        if self.at("::"):
            self.advance()
            return Cons(left, self.pred_cons())
        if self.at("@"):
            self.advance()
            return Append(left, self.pred_cons())
        return left

    def pred_add(self):
        left = self.pred_mul()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.pred_mul()
            left = Add(left, right) if op == "+" else Add(left, Neg(right))
        return left

    def pred_mul(self):
        left = self.pred_unary()
        while self.at("*", "/"):
            op = self.advance().text
            right = self.pred_unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def pred_unary(self):
        if self.at("-"):
            self.advance()
            if self.tok.kind == "NUM":
                return Num(-int(self.advance().text))
            return Neg(self.pred_unary())
        return self.pred_app()

    def pred_app(self):
        tok = self.tok
        if tok.kind == "IDENT":
            if tok.text in _UNARY and self._starts_pred_atom(1):
                self.advance()
                return _UNARY[tok.text](self.pred_atom())
            if tok.text == "nth" and self._starts_pred_atom(1):
                self.advance()
                index = self.pred_atom()
                return Nth(index, self.pred_atom())
            if tok.text == "shape" and self.peek().kind == "IDENT":
                self.advance()
                return ShapeOf(Var(self.ident()))
            if tok.text in _CALLS and self.peek().text == "(":
                self.advance()
                cls, arity = _CALLS[tok.text]
                self.expect("(")
                args = [self.pred()]
                while self.at(","):
                    self.advance()
                    args.append(self.pred())
                self.expect(")")
                if len(args) != arity:
                    raise ParseError(f"{tok.text} takes {arity} arguments", tok.span)
                return cls(*args)
        return self.pred_atom()

    def _starts_pred_atom(self, k):
        tok = self.peek(k)
        return tok.kind in ("NUM", "IDENT") or tok.text in ("(", "[", "true", "false")

    def pred_atom(self):
        tok = self.tok
        if tok.kind == "NUM":
            self.advance()
            return Num(int(tok.text))
        if self.at("true", "false"):
            self.advance()
            return BoolConst(tok.text == "true")
        if tok.kind == "IDENT":
            self.advance()
            if tok.text.endswith(".shape"):
                return ShapeOf(Var(tok.text[:-len(".shape")]))
            return Var(tok.text)
        if self.at("["):
            self.advance()
            items = []
            while not self.at("]"):
                items.append(self.pred_add())
                if not self.at("]"):
                    self.expect(";")
            self.advance()
            return ShapeList(tuple(items))
        if self.at("("):
            self.advance()
            inner = self.pred()
            self.expect(")")
            return inner
        self.fail("predicate")


#******************************************************************************
#                        A-normal form and renaming
#******************************************************************************

def _spine(t):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, list(reversed(args))


def anf(t, temps):
    # type: (Term, NameSupply) -> Term
    """Hoist non-variable application operands and `if` conditions into lets."""
    if isinstance(t, App):
        head, args = _spine(t)
        head = anf(head, temps)
        binds, names = [], []
        for arg in args:
            arg = anf(arg, temps)
            if isinstance(arg, Ident):
                names.append(arg)
            else:
                name = temps()
                binds.append((name, arg))
                names.append(Ident(name, span=arg.span))
        out = head
        for arg in names:
            out = App(out, arg, span=t.span)
        for name, rhs in reversed(binds):
            out = Let(name, rhs, out, span=rhs.span)
        return out
    if isinstance(t, If):
        cond = anf(t.cond, temps)
        then, else_ = anf(t.then, temps), anf(t.else_, temps)
        if isinstance(cond, Ident):
            return If(cond, then, else_, t.ann, span=t.span)
        name = temps()
        branch = If(Ident(name, span=cond.span), then, else_, t.ann, span=t.span)
        return Let(name, cond, branch, span=cond.span)
    if isinstance(t, Lam):
        return Lam(t.var, t.ann, anf(t.body, temps), span=t.span)
    if isinstance(t, Let):
        return Let(t.var, anf(t.rhs, temps), anf(t.body, temps), t.ann, t.scope, span=t.span)
    if isinstance(t, Fix):
        return Fix(t.fn, t.ann, t.var, anf(t.body, temps), span=t.span)
    if isinstance(t, Annot):
        return Annot(anf(t.term, temps), t.ty, span=t.span)
    if isinstance(t, Assert):
        return Assert(t.pred, anf(t.body, temps), span=t.span)
    return t


class _Uniquifier:

    def __init__(self, used):
        self.used = set(used)

    def _bind(self, name, ren):
        if name not in self.used:
            self.used.add(name)
            return name, ren
        new = fresh_name(name, self.used)
        self.used.add(new)
        ren = dict(ren)
        ren[name] = new
        return new, ren

    @staticmethod
    def _ty(ty, ren):
        if ty is None or not ren:
            return ty
        return subst_type(ty, {k: Var(v) for k, v in ren.items()})

    def term(self, t, ren):
        if isinstance(t, Ident):
            return Ident(ren.get(t.name, t.name), span=t.span) if t.name in ren else t
        if isinstance(t, Const):
            return t
        if isinstance(t, App):
            return App(self.term(t.fn, ren), self.term(t.arg, ren), span=t.span)
        if isinstance(t, Annot):
            return Annot(self.term(t.term, ren), self._ty(t.ty, ren), span=t.span)
        if isinstance(t, If):
            return If(self.term(t.cond, ren), self.term(t.then, ren), self.term(t.else_, ren),
                      self._ty(t.ann, ren), span=t.span)
        if isinstance(t, Assert):
            pred = subst_expr(t.pred, {k: Var(v) for k, v in ren.items()}) if ren else t.pred
            return Assert(pred, self.term(t.body, ren), span=t.span)
        if isinstance(t, Lam):
            ann = self._ty(t.ann, ren)
            var, inner = self._bind(t.var, ren)
            return Lam(var, ann, self.term(t.body, inner), span=t.span)
        if isinstance(t, Let):
            ann = self._ty(t.ann, ren)
            if isinstance(t.rhs, Fix) and t.rhs.fn == t.var:
                var, inner = self._bind(t.var, ren)
                rhs = self.rec(t.rhs, inner, var)
            else:
                rhs = self.term(t.rhs, ren)
                var, inner = self._bind(t.var, ren)
            return Let(var, rhs, self.term(t.body, inner), ann, self._ty(t.scope, ren), span=t.span)
        if isinstance(t, Fix):
            ann = self._ty(t.ann, ren)
            fn, inner = self._bind(t.fn, ren)
            var, inner = self._bind(t.var, inner)
            return Fix(fn, ann, var, self.term(t.body, inner), span=t.span)
        return t

    def rec(self, t, ren, name):
        """A `let rec` right-hand side, recursive under the name `name` of its binding."""
        var, inner = self._bind(t.var, ren)
        return Fix(name, self._ty(t.ann, ren), var, self.term(t.body, inner), span=t.span)


def uniquify(t, used=()):
    # type: (Term, Iterable[str]) -> Term
    """Rename binders so that none shadows another or a name in `used`."""
    return _Uniquifier(used).term(t, {})


#******************************************************************************
#                                Entry points
#******************************************************************************

def parse_program(text, stubs=()):
    # type: (str, Iterable[StubDecl]) -> Program
    """
    Parse a program, normalize it to A-normal form and rename its
    binders apart.

    Raises:
        `ParseError`: Syntax error, with position and expected tokens.
    """
    parser = Parser(text)
    program = parser.program()
    stub_names = {s.name for s in stubs} | {s.name for s in program.stubs}
    uniq = _Uniquifier(stub_names | set(program.names()))
    bindings = []
    for binding in program.bindings:
        term = anf(binding.term, parser.temps)
        if isinstance(term, Fix) and term.fn == binding.name:
            term = uniq.rec(term, {}, binding.name)
        else:
            term = uniq.term(term, {})
        uniq.used.add(binding.name)
        bindings.append(TopBinding(binding.name, term, binding.span, binding.is_main))
    return Program(bindings, program.stubs)


def parse_stubs(text):
    # type: (str) -> list[StubDecl]
    """
    Parse `val name : type` declarations.

    Raises:
        `ParseError`: Syntax error.

        `WfError`: A signature is ill-sorted.
    """
    decls = Parser(text).stubs()
    for decl in decls:
        env = {name: BaseType.INT_LIST for name in decl.shape_params}
        env.update({name: BaseType.BOOL for name in decl.pred_params})
        wf_type(decl.ty, env)
    return decls


def parse_type(text):
    """Parse a single refinement type."""
    parser = Parser(text)
    ty = parser.type()
    if parser.tok.kind != "EOF":
        parser.fail("end of input")
    return ty


def parse_pred(text):
    parser = Parser(text)
    p = parser.pred()
    if parser.tok.kind != "EOF":
        parser.fail("end of input")
    return p
