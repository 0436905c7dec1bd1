import json
import os

from config import CORPUS_DIR
from main import build_parser, main, settings_from_args


def corpus(name):
    return os.path.join(CORPUS_DIR, name)


def test_settings_from_flags():
    args = build_parser().parse_args(["check", "a.gt", "--no-poly", "--fuel", "9", "--stub", "s.gti"])
    assert settings_from_args(args) == {"poly": False, "fuel": 9, "stubs": ["s.gti"]}
    assert settings_from_args(build_parser().parse_args(["check", "a.gt"])) == {}


def test_check_exit_codes(capsys):
    assert main(["check", corpus("transpose.gt")]) == 0
    assert "accepted" in capsys.readouterr().out
    assert main(["check", corpus("intro_reject.gt")]) == 1
    assert "counterexample" in capsys.readouterr().out
    assert main(["check", corpus("parse_error.gt")]) == 2
    assert main(["check", corpus("missing.gt")]) == 2


def test_check_json(capsys):
    assert main(["check", "--json", corpus("load_cast.gt")]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["status"] == "accepted"
    assert data["asserts"] == len(data["checks"]) == 1


def test_elaborate(capsys):
    assert main(["elaborate", corpus("load_cast.gt")]) == 0
    assert "assert" in capsys.readouterr().out


def test_elaborate_emit_file(tmp_path):
    out = tmp_path / "load_cast.out"
    assert main(["elaborate", corpus("load_cast.gt"), "--emit", str(out)]) == 0
    first = out.read_text(encoding="UTF-8")
    assert "assert" in first
    assert main(["elaborate", corpus("load_cast.gt"), "--emit", str(out)]) == 0
    assert out.read_text(encoding="UTF-8") == first

    rejected = tmp_path / "reject.out"
    assert main(["elaborate", corpus("intro_reject.gt"), "--emit", str(rejected)]) == 1
    assert not rejected.exists()


def test_run_exit_codes(capsys):
    assert main(["run", corpus("hybrid_if.gt"), "2", "tensor[20]"]) == 0
    assert capsys.readouterr().out.strip() == "tensor[1]"
    assert main(["run", corpus("hybrid_if.gt"), "1", "tensor[20]"]) == 3
    assert capsys.readouterr().out.startswith("blame:")
    assert main(["run", corpus("hybrid_if.gt"), "x"]) == 2
    assert main(["run", corpus("intro_reject.gt")]) == 1


def test_out_of_fuel(tmp_path):
    source = tmp_path / "loop.gt"
    source.write_text("let rec f (x : int) : int = f x\n;;\nlet _ = f 0\n", encoding="UTF-8")
    assert main(["run", "--fuel", "50", str(source)]) == 4


def test_proptest(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    plot = tmp_path / "gg.png"
    assert main(["proptest", "--cases", "3", "--json", "--plot", str(plot)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["cases"] == 3
    assert plot.exists()
