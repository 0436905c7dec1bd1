import io
import json
import logging

import pytest

import model.file_op as fo
from model.gradual import PropertyReport
from model.model import (
    EXIT_BLAME, EXIT_ERROR, EXIT_FUEL, EXIT_OK, EXIT_REJECTED, Model, outcome_exit_code,
)
from model.runtime import Blame, OutOfFuel, Stuck, Value, parse_value
from model.settings import Settings
from model.tools.charts import create_outcome_chart, save_chart
from view.view import View

ACCEPTED = "let f (x : tensor([2; 3])) = Tensor.tr x\n;;\nlet _ = f (Tensor.zeros [2; 3])\n"
REJECTED = "let _ = Tensor.tr (Tensor.zeros [2; 3; 4])\n"


#**************
#*  Settings  *
#**************

def test_settings_defaults():
    settings = Settings()
    assert settings.fuel == 1_000_000
    assert settings.int_range == (-4, 4)
    assert settings.stubs == []
    assert settings.solver_options()["rounds"] == settings.prover_rounds


def test_set_setting():
    settings = Settings()
    settings.set_setting(int_range=[-2, 2], fuel=10)
    assert settings.int_range == (-2, 2)
    assert settings.fuel == 10
    with pytest.raises(AttributeError):
        settings.set_setting(colour="red")


def test_solver_setting_changes():
    settings = Settings()
    assert settings.changes_solver_setting(search_limit=10)
    assert not settings.changes_solver_setting(search_limit=settings.search_limit)
    assert not settings.changes_solver_setting(fuel=3)


def test_unknown_settings_are_ignored(caplog):
    checker = Model(Settings().to_dict())
    with caplog.at_level(logging.WARNING):
        checker.set_settings(colour="red", fuel=5)
    assert checker.get_settings()["fuel"] == 5
    assert "colour" in caplog.text


#***********
#*  Files  *
#***********

def test_read_source(tmp_path):
    source = tmp_path / "p.gt"
    source.write_text(REJECTED, encoding="UTF-8")
    assert fo.read_source(str(source)) == REJECTED
    with pytest.raises(FileNotFoundError):
        fo.read_source(str(tmp_path / "missing.gt"))
    with pytest.raises(AttributeError):
        fo.read_source(str(tmp_path / "p.docx"))


def test_save_failure(tmp_path):
    path = fo.save_failure(str(tmp_path / "failures"), 4, {"seed": 4, "left": "let x = 1"})
    assert path.endswith("case-4.json")
    assert fo.load_json(path) == {"seed": 4, "left": "let x = 1"}


def test_save_text_creates_folders(tmp_path):
    target = tmp_path / "a" / "b.txt"
    fo.save_text(str(target), "clauses\n")
    assert target.read_text(encoding="UTF-8") == "clauses\n"


#**************
#*  Checking  *
#**************

def test_accepted_report(model):
    report = model.check(ACCEPTED, "ok.gt")
    assert report.accepted
    assert report.status == "accepted"
    assert report.exit_code == EXIT_OK
    assert set(report.types) == {"f", "main"}
    assert "Tensor.tr" in report.elaborated_text()


def test_rejected_report(model):
    report = model.check(REJECTED, "bad.gt")
    assert not report.accepted
    assert report.status == "rejected"
    assert report.exit_code == EXIT_REJECTED
    assert report.diagnostics[0].severity == "error"
    assert report.elaborated_text() == ""


def test_malformed_input(model):
    report = model.check("let = 3", "broken.gt")
    assert report.status == "error"
    assert report.exit_code == EXIT_ERROR
    assert report.diagnostics[0].rule == "parse"
    assert model.check("let f x = y", "scope.gt").exit_code == EXIT_ERROR


def test_runtime_checks_are_reported(model):
    report = model.check("let _ = Tensor.tr (load 5)\n", "load.gt")
    assert report.accepted
    assert report.asserts >= 1
    assert any(d.rule == "assert" for d in report.diagnostics)


def test_run(model):
    report, outcome = model.run(ACCEPTED, filename="ok.gt")
    assert report.accepted
    assert isinstance(outcome, Value)
    assert str(outcome) == "tensor[3; 2]"
    assert model.run(REJECTED)[1] is None


def test_run_with_arguments(model):
    text = "let f (x : {v:tensor | len v.shape = 2}) = Tensor.tr x\n"
    _, outcome = model.run(text, [parse_value("tensor[4;5]")])
    assert str(outcome) == "tensor[5; 4]"


def test_outcome_exit_codes():
    assert outcome_exit_code(Value(None)) == EXIT_OK
    assert outcome_exit_code(Blame(None)) == EXIT_BLAME
    assert outcome_exit_code(OutOfFuel()) == EXIT_FUEL
    assert outcome_exit_code(Stuck(None)) == EXIT_ERROR


def test_stub_passed_as_argument():
    checker = Model(Settings(poly=False).to_dict())
    text = "let app f x = f x\n;;\nlet _ = app Tensor.relu (Tensor.zeros [2])\n"
    report = checker.check(text, "app.gt")
    assert report.accepted
    assert report.exit_code == EXIT_OK
    _, outcome = checker.run(text)
    assert str(outcome) == "tensor[2]"


def test_dump_chc(tmp_path):
    target = tmp_path / "out" / "clauses.txt"
    checker = Model({**Settings().to_dict(), "dump_chc": str(target)})
    checker.check(ACCEPTED)
    assert target.read_text(encoding="UTF-8").startswith("# clauses")


def test_extra_stubs(tmp_path):
    stub = tmp_path / "extra.gti"
    stub.write_text("val h : x:tensor([4]) -> tensor([2])\n", encoding="UTF-8")
    checker = Model({**Settings().to_dict(), "stubs": [str(stub)]})
    assert checker.check("let _ = h (Tensor.zeros [4])\n").accepted
    assert checker.check("let _ = h (Tensor.zeros [5])\n").status == "rejected"


#************
#*   View   *
#************

def test_text_view(model):
    stream = io.StringIO()
    View(stream=stream).show_report(model.check(REJECTED, "bad.gt"))
    lines = stream.getvalue().splitlines()
    assert lines[0].startswith("bad.gt:")
    assert "error" in lines[0]
    assert lines[-1] == "bad.gt: rejected"


def test_json_view(model):
    stream = io.StringIO()
    View(json_output=True, stream=stream).show_report(model.check(ACCEPTED, "ok.gt"), emit=True)
    data = json.loads(stream.getvalue())
    assert data["status"] == "accepted"
    assert data["exit_code"] == 0
    assert "f" in data["types"]
    assert data["elaborated"]


def test_outcome_chart(tmp_path):
    report = PropertyReport(cases=3, ok=2, skipped=1)
    report.outcomes[("value", "value")] += 2
    fig = create_outcome_chart(report)
    assert len(fig.axes) == 2
    save_chart(fig, str(tmp_path / "chart.png"))
    assert (tmp_path / "chart.png").exists()
