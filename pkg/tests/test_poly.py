import pytest

from model.ast import BaseType, PredApp, TRUE, TypeEnv, type_pred_vars
from model.elaborate import subtype
from model.errors import InferenceFailed
from model.infer import PredVarSupply
from model.poly import (
    TypeScheme, instantiate_refpoly_stub, pt_var, shape_literal, stub_env, variant_names, weaken,
)
from model.solver import Verdict
from conftest import ty

IDENTITY = TypeScheme((("S1", BaseType.INT_LIST),),
                      ty("x:{v:tensor | v.shape = S1} -> {v:tensor | v.shape = S1}"))


def test_prelude_schemes(env):
    forward = env["Layer.forward"]
    assert isinstance(forward, TypeScheme)
    assert forward.is_refpoly
    assert forward.names == ("b1", "b2")
    assert not isinstance(env["Tensor.tr"], TypeScheme)


def test_weaken_drops_shape_parameters():
    t = ty("x:tensor -> {v:tensor | v.shape = S && len v.shape = 1}")
    assert weaken(t, ["S"]) == ty("x:tensor -> {v:tensor | len v.shape = 1}")


def test_shape_literal():
    assert shape_literal(ty("tensor([2; 3])")) == (2, 3)
    assert shape_literal(ty("{v:tensor | len v.shape = 2}")) is None
    assert shape_literal(ty("int")) is None


def test_shape_arguments_are_matched():
    inst, shapes = pt_var(IDENTITY, [ty("tensor([2; 3])")])
    assert shapes == ((2, 3),)
    assert inst == ty("x:tensor([2; 3]) -> tensor([2; 3])")


def test_unmatched_shape_argument():
    with pytest.raises(InferenceFailed):
        pt_var(IDENTITY, [ty("{v:tensor | prod v.shape = 128}")])


def test_disagreeing_shape_arguments():
    pair = TypeScheme((("S1", BaseType.INT_LIST),),
                      ty("x:{v:tensor | v.shape = S1} -> y:{v:tensor | v.shape = S1} -> tensor"))
    with pytest.raises(InferenceFailed):
        pt_var(pair, [ty("tensor([2])"), ty("tensor([3])")])


def test_variant_names():
    assert variant_names("app", {"app"}) == ("app_poly", "app_mono")
    poly, mono = variant_names("app", {"app", "app_poly"})
    assert poly not in {"app", "app_poly"}
    assert mono == "app_mono"


def test_refinement_parameter_is_shared():
    scheme = TypeScheme((("b1", BaseType.BOOL),), ty("x:{x:tensor | b1} -> {y:tensor | b1}"))
    supply = PredVarSupply()
    inst = instantiate_refpoly_stub(scheme, (("n", BaseType.INT),), supply)
    assert len(supply.created) == 1
    pv = supply.created[0]
    assert pv.n_deps == 1
    assert type_pred_vars(inst) == {pv}
    assert isinstance(inst.dom.pred, PredApp)


def test_scheme_without_parameters_is_its_body():
    body = ty("x:tensor -> tensor")
    assert instantiate_refpoly_stub(TypeScheme((), body), (), PredVarSupply()) is body


def test_app_is_split(model, corpus_file):
    report = model.check(corpus_file("poly_app.gt"), "poly_app.gt")
    assert report.accepted
    assert [name for name, _, _ in report.poly.resolved] == ["app"]
    assert [name for name, _, _ in report.poly.fallbacks] == ["app"]
    assert {"app_poly", "app_mono"} <= set(report.types)


def test_fallback_is_reported(model, corpus_file):
    report = model.check(corpus_file("poly_prod.gt"), "poly_prod.gt")
    assert report.accepted
    assert any(d.rule == "PT-Var" and d.severity == "info" for d in report.diagnostics)


def equivalent(left, right):
    return (subtype(TypeEnv(), TRUE, left, right) is Verdict.VALID
            and subtype(TypeEnv(), TRUE, right, left) is Verdict.VALID)


def test_split_types(model, corpus_file):
    report = model.check(corpus_file("poly_app.gt"), "poly_app.gt")
    (_, _, shapes), = report.poly.resolved
    assert shapes == ((2, 3), (1,))
    inst, _ = pt_var(report.poly.schemes["app"], [ty("tensor([2; 3]) -> tensor([1])")])
    assert equivalent(inst.cod, ty("x:tensor([2; 3]) -> tensor([1])"))
    assert equivalent(report.types["app_mono"].cod, ty("x:tensor -> tensor"))
    assert shape_literal(report.types["a"]) == (1,)
