import os

import pytest

import model.file_op as fo
from config import CORPUS_DIR
from model.ast import TRUE, TypeEnv
from model.elaborate import subtype
from model.parser import parse_pred, parse_type
from model.printer import print_expr
from model.runtime import parse_value
from model.solver import Verdict

EXPECTED = fo.load_json(os.path.join(CORPUS_DIR, "expected.json"))


def runs_of(entry):
    if "run" in entry:
        return [entry["run"]]
    return entry.get("runs", [])


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_check(model, corpus_file, name):
    expected = EXPECTED[name]
    report = model.check(corpus_file(name), name)
    errors = [d.message for d in report.diagnostics if d.severity == "error"]
    assert report.status == expected["status"], errors
    assert report.exit_code == expected["exit_code"]
    if "asserts" in expected:
        assert report.asserts == expected["asserts"], report.checks
    if "checks" in expected:
        assert report.checks == [print_expr(parse_pred(c)) for c in expected["checks"]]


@pytest.mark.parametrize("name, run", [(name, run) for name in sorted(EXPECTED)
                                       for run in runs_of(EXPECTED[name])])
def test_run(model, corpus_file, name, run):
    args = [parse_value(a) for a in run["args"]]
    report, outcome = model.run(corpus_file(name), args, name)
    assert outcome is not None, [d.message for d in report.diagnostics]
    assert outcome.kind == run["outcome"], str(outcome)
    if "result" in run:
        assert str(outcome) == run["result"]


def test_every_program_has_an_expectation():
    sources = {f for f in os.listdir(CORPUS_DIR) if f.endswith(".gt")}
    assert sources == set(EXPECTED)


def test_rejection_has_a_counterexample(model, corpus_file):
    report = model.check(corpus_file("intro_reject.gt"), "intro_reject.gt")
    error = next(d for d in report.diagnostics if d.severity == "error")
    assert error.rule == "Cast-Base-reject"
    assert error.witness


def test_inferred_model_type(model, corpus_file):
    report = model.check(corpus_file("intro_model.gt"), "intro_model.gt")
    expected = parse_type("s:int -> x:{v:tensor | len v.shape = 1 && nth 0 v.shape / s = 10}"
                          " -> tensor([1])")
    inferred = report.types["model"]
    assert subtype(TypeEnv(), TRUE, inferred, expected) is Verdict.VALID
    assert subtype(TypeEnv(), TRUE, expected, inferred) is Verdict.VALID
