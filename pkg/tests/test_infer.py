import pytest

from model.ast import (
    Base, BaseType, Fun, PredApp, TRUE, TypeEnv, Var, conj, conjuncts, subst_expr,
)
from model.errors import ShapeMismatch
from model.infer import (
    Clause, Constraint, PredVarSupply, decompose_to_chc, default_unsolved, infer_program,
    make_template, solve_clauses,
)
from model.parser import parse_program, parse_type
from model.poly import stub_env
from model.simpletypes import INT as S_INT, TENSOR as S_TENSOR, TArrow, infer_simple
from model.solver import check_validity
from conftest import pred

INT = BaseType.INT
TENSOR = BaseType.TENSOR

FIG_MODEL = """val g : tensor([10]) -> tensor([1])

let model s =
  let f = Tensor.avg_pool1d s in
  fun x -> let y = f x in g y
"""


def infer(text, stubs):
    program = parse_program(text, stubs)
    env = stub_env(stubs + list(program.stubs))
    return infer_program(infer_simple(program, env), env)


def unknown(supply, name="v", base=INT):
    pv = supply(((name, base),), 0)
    return Base(name, base, PredApp(pv, (Var(name),)))


def entails(prefix, hyp, goal):
    return check_validity(prefix, hyp, goal).valid


def test_template_deps():
    supply = PredVarSupply()
    t = make_template(TArrow(S_INT, TArrow(S_TENSOR, S_TENSOR)), (), supply)
    assert isinstance(t, Fun) and isinstance(t.cod, Fun)
    assert [pv.n_deps for pv in supply.created] == [0, 1, 2]
    last = supply.created[-1]
    assert [base for _, base in last.inputs] == [INT, TENSOR, TENSOR]


def test_function_constraint_splits():
    left = parse_type("x:int -> {v:int | v = x + 1}")
    right = parse_type("y:{v:int | v > 0} -> {v:int | v > 1}")
    clauses = decompose_to_chc([Constraint(TypeEnv(), (), left, right)])
    assert len(clauses) == 2
    assert [len(c.prefix) for c in clauses] == [1, 2]


def test_base_mismatch():
    with pytest.raises(ShapeMismatch):
        decompose_to_chc([Constraint(TypeEnv(), (), parse_type("int"), parse_type("tensor"))])


def test_lonely_right_hand_side_is_solved():
    supply = PredVarSupply()
    target = unknown(supply)
    clauses = decompose_to_chc([Constraint(TypeEnv(), (), parse_type("{v:int | v = 3}"), target)])
    solution = solve_clauses(clauses, supply)
    solved = solution.apply(target.pred)
    assert entails((("v", INT),), solved, pred("v = 3"))
    assert entails((("v", INT),), pred("v = 3"), solved)


def test_left_hand_side_is_strengthened():
    supply = PredVarSupply()
    source = unknown(supply)
    clauses = decompose_to_chc([Constraint(TypeEnv(), (), source, parse_type("{v:int | v > 0}"))])
    solution = default_unsolved(solve_clauses(clauses, supply), supply.created)
    assert entails((("v", INT),), solution.apply(source.pred), pred("v > 0"))


def test_model_domain(stubs):
    inference = infer(FIG_MODEL, stubs)
    t = inference.types["model"]
    inner = t.cod
    s, x = t.var, inner.var
    hyp = conj(subst_expr(t.dom.pred, {t.dom.var: Var(s)}),
               subst_expr(inner.dom.pred, {inner.dom.var: Var(x)}))
    goal = subst_expr(pred("nth 0 x.shape / s = 10"), {"x": Var(x), "s": Var(s)})
    assert entails(((s, INT), (x, TENSOR)), hyp, goal)


def test_program_is_annotated(stubs):
    inference = infer(FIG_MODEL, stubs)
    assert inference.program.names() == ["model"]
    assert inference.chc_report().startswith("# clauses\n")
    assert "# solution" in inference.chc_report()


def test_let_result_shape(stubs):
    inference = infer("let y = Tensor.tr (Tensor.zeros [2; 3])", stubs)
    t = inference.types["y"]
    assert t.base is TENSOR
    assert entails(((t.var, TENSOR),), t.pred, subst_expr(pred("v.shape = [3; 2]"), {"v": Var(t.var)}))


def at(pv, *names):
    return PredApp(pv, tuple(Var(n) for n in names))


def test_pooling_clauses_strengthen_domain():
    # s:p, x:q; the three clauses of `fun x -> let y = f x in g y` after splitting on s = 1
    supply = PredVarSupply()
    p = supply((("s", INT),), 0)
    q = supply((("s", INT), ("v", TENSOR)), 1)
    r = supply((("s", INT), ("x", TENSOR), ("v", TENSOR)), 2)
    prefix = (("s", INT), ("x", TENSOR), ("v", TENSOR))
    env = (at(p, "s"), at(q, "s", "x"))
    clauses = [
        Clause(env + (pred("s = 1"),), (at(q, "s", "v"),), (at(r, "s", "x", "v"),), prefix, 0),
        Clause(env + (pred("s <> 1"),), (at(q, "s", "v"),), (pred("len v.shape = 1"),), prefix, 1),
        Clause(env + (pred("s <> 1"),), (pred("v.shape = [nth 0 x.shape / s]"),),
               (at(r, "s", "x", "v"),), prefix, 2),
    ]
    solution = solve_clauses(clauses, supply)
    assert q in solution and p not in solution and r not in solution
    atoms = conjuncts(solution.map[q])
    rest = [a for a in atoms if isinstance(a, PredApp)]
    assert len(rest) == 1 and rest[0].var not in (p, q, r)
    plain = conj(*(a for a in atoms if not isinstance(a, PredApp)))
    formals = (("s", INT), ("v", TENSOR))
    assert entails(formals, plain, pred("len v.shape = 1"))
    assert entails(formals, pred("len v.shape = 1"), plain)

    default_unsolved(solution, supply.created)
    assert solution.map[p] == TRUE and solution.map[r] == TRUE
    assert solution.map[rest[0].var] == TRUE
    assert entails(formals, solution.apply(at(q, "s", "v")), pred("len v.shape = 1"))


def test_right_hand_side_also_in_context_is_solved():
    supply = PredVarSupply()
    p = supply((("v", INT),), 0)
    clause = Clause((at(p, "x"),), (pred("v = 3"),), (at(p, "v"),), (("x", INT), ("v", INT)), 0)
    solution = solve_clauses([clause], supply)
    assert p in solution
    assert entails((("v", INT),), solution.map[p], pred("v = 3"))
    assert entails((("v", INT),), pred("v = 3"), solution.map[p])
