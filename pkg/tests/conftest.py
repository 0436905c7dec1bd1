import os

import pytest

from config import CORPUS_DIR
from model.model import Model
from model.parser import parse_pred, parse_program, parse_type
from model.poly import stub_env
from model.settings import Settings
from model.simpletypes import infer_simple


@pytest.fixture(scope="session")
def model():
    """A checker with the default settings, the prelude only."""
    return Model(Settings().to_dict())


@pytest.fixture(scope="session")
def stubs(model):
    return model.load_stubs()


@pytest.fixture(scope="session")
def env(stubs):
    return stub_env(stubs)


@pytest.fixture
def corpus_file():
    def read(name):
        with open(os.path.join(CORPUS_DIR, name), encoding="UTF-8") as file:
            return file.read()
    return read


def ty(text):
    return parse_type(text)


def pred(text):
    return parse_pred(text)


def simple(text, stubs):
    """`text` parsed against `stubs` and simply typed."""
    program = parse_program(text, stubs)
    return infer_simple(program, stub_env(stubs + list(program.stubs)))
