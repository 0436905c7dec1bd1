"""Model module.

This module manages all the logic of the program: it owns the
settings and the loaded stubs, and drives a source text through
parsing, simple typing, refinement inference, polymorphic splitting,
elaboration, assert erasure and target checking.
"""

import logging
from copy import deepcopy
from dataclasses import dataclass, field
from typing import Any

from config import DEFAULTS_FILE, PRELUDE_FILE, SETTINGS_FILE
import model.file_op as fo
from model import solver
from model.ast import App, Annot, Assert, BaseType, Fix, If, Lam, Let
from model.elaborate import check_target, elaborate, erase_program
from model.errors import (Diagnostic, RejectedCast, ShapeMismatch, ShapecastError,
                          TargetTypeError, UnificationError)
from model.infer import infer_program
from model.parser import parse_program, parse_stubs
from model.poly import monomorphize, stub_env
from model.printer import print_expr, print_program
from model.runtime import Blame, Evaluator, OutOfFuel, Value, program_term
from model.settings import Settings
from model.simpletypes import infer_simple
from model.sorts import wf_type

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2
EXIT_BLAME = 3
EXIT_FUEL = 4

# static rejections; every other checker error is a malformed input
_REJECTIONS = (RejectedCast, ShapeMismatch, UnificationError)


@dataclass
class Report:
    """
    Everything a check produced, phase by phase.

    A phase that was not reached leaves its field at None.
    `types` holds the refinement type of every top-level binding
    as elaborated; `checks` prints the predicate of every assertion left
    after erasure and `asserts` counts them.
    """
    filename: str
    program: Any = None
    inference: Any = None
    poly: Any = None
    elaboration: Any = None
    target: Any = None
    types: dict = field(default_factory=dict)
    asserts: int = 0
    checks: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def accepted(self):
        return self.target is not None and self.exit_code == EXIT_OK

    @property
    def status(self):
        if self.accepted:
            return "accepted"
        return "rejected" if self.exit_code == EXIT_REJECTED else "error"

    def fail(self, exc):
        # type: (ShapecastError) -> Report
        self.diagnostics.append(Diagnostic.from_error(exc))
        self.exit_code = EXIT_REJECTED if isinstance(exc, _REJECTIONS) else EXIT_ERROR
        return self

    def elaborated_text(self):
        # type: () -> str
        return print_program(self.target) if self.target is not None else ""


def asserted(t):
    # type: (Term) -> list
    """Predicates of the assertions inside target term `t`, in program order."""
    if isinstance(t, Assert):
        return [t.pred] + asserted(t.body)
    if isinstance(t, Let):
        return asserted(t.rhs) + asserted(t.body)
    if isinstance(t, (Lam, Fix)):
        return asserted(t.body)
    if isinstance(t, If):
        return asserted(t.then) + asserted(t.else_)
    if isinstance(t, App):
        return asserted(t.fn) + asserted(t.arg)
    if isinstance(t, Annot):
        return asserted(t.term)
    return []


class Model():
    """
    This class handles the variables and methods
    composing the logic of the program.
    """
    def __init__(self, settings=None):
        # settings
        self._settings = Settings()
        # stubs, keyed by the stub files they come from
        self._stub_cache = {}
        if settings is None:
            self._load_config()
        else:
            self.set_settings(**settings)
        solver.configure(**self._settings.solver_options())

    #*******************
    #*  Configuration  *
    #*******************

    def get_settings(self):
        # type: () -> dict[str, Any]
        """Get the current settings."""
        return deepcopy(self._settings.to_dict())

    def set_settings(self, **settings):
        """
        Change settings. Unknown names are logged and ignored; solver
        settings are handed over to the solver, dropping its cache.
        """
        known = {k: v for k, v in settings.items() if hasattr(self._settings, k)}
        unknown = sorted(set(settings) - set(known))
        if unknown:
            logger.warning("ignoring unknown settings %s", unknown)
        solver_changed = self._settings.changes_solver_setting(**known)
        self._settings.set_setting(**known)
        if solver_changed:
            solver.configure(**self._settings.solver_options())
        if 'stubs' in known:
            self._stub_cache.clear()

    def _load_config(self):
        for filepath in (DEFAULTS_FILE, SETTINGS_FILE):
            try:
                settings = fo.load_json(filepath)
            except FileNotFoundError:
                logger.debug("no settings at %s", filepath)
                continue
            self.set_settings(**settings)

    @property
    def settings(self):
        return self._settings

    #***********
    #*  Stubs  *
    #***********

    def load_stubs(self):
        # type: () -> list[StubDecl]
        """
        Declarations of the prelude followed by those of every `--stub` file.

        Raises:
            `ParseError`, `WfError`: A stub file is malformed.

            `FileNotFoundError`: A stub file does not exist.
        """
        key = tuple(self._settings.stubs)
        if key not in self._stub_cache:
            decls = []
            for filepath in (PRELUDE_FILE,) + key:
                decls += parse_stubs(fo.read_source(filepath))
                logger.debug("stubs loaded from %s", filepath)
            self._stub_cache[key] = decls
        return list(self._stub_cache[key])

    @staticmethod
    def _check_local_stubs(program):
        for decl in program.stubs:
            env = {name: BaseType.INT_LIST for name in decl.shape_params}
            env.update({name: BaseType.BOOL for name in decl.pred_params})
            wf_type(decl.ty, env)

    #**************
    #*  Checking  *
    #**************

    def load_text(self, filepath):
        # type: (str) -> str
        """
        Read a program file.

        Raises:
            `FileNotFoundError`: Could not find the file.

            `AttributeError`: File not compatible.
        """
        return fo.read_source(filepath)

    def check(self, text, filename="<input>"):
        # type: (str, str) -> Report
        """
        Run every static phase over `text`. Failures end up as
        diagnostics of the report, never as exceptions.
        """
        report = Report(filename)
        try:
            decls = self.load_stubs()
        except ShapecastError as exc:
            return report.fail(exc)
        try:
            program = parse_program(text, decls)
            self._check_local_stubs(program)
        except ShapecastError as exc:
            return report.fail(exc)
        report.program = program
        env = stub_env(decls + list(program.stubs))

        try:
            inference = infer_program(infer_simple(program, env), env)
            if self._settings.poly:
                split, poly = monomorphize(inference)
                report.poly = poly
                for name, span, reason in poly.fallbacks:
                    report.diagnostics.append(Diagnostic(
                        "info", "PT-Var", f"{name} used monomorphically: {reason}", span))
                for name in poly.unused_mono:
                    report.diagnostics.append(Diagnostic(
                        "warning", "PT-Let", f"{name} is never used"))
                if split is not inference.annotated:
                    inference = infer_program(infer_simple(split, env), env)
            report.inference = inference
            self._dump_chc(inference)

            expected = {b.name: inference.types[b.name]
                        for b in inference.program.bindings if not b.is_main}
            elaboration = elaborate(inference.program, expected)
            report.elaboration = elaboration
            target = erase_program(elaboration.program)
        except ShapecastError as exc:
            logger.info("%s: %s", filename, exc)
            return report.fail(exc)

        try:
            report.types = check_target(target, elaboration.types)
        except TargetTypeError as exc:
            logger.error("elaborated program does not type-check: %s", exc)
            return report.fail(exc)
        report.target = target
        report.checks = [print_expr(p) for b in target.bindings for p in asserted(b.term)]
        report.asserts = len(report.checks)
        for span, preds in elaboration.asserts:
            text = " && ".join(print_expr(p) for p in preds)
            report.diagnostics.append(Diagnostic("info", "assert", f"runtime check: {text}", span))
        logger.info("%s accepted with %d runtime checks", filename, report.asserts)
        return report

    def _dump_chc(self, inference):
        if self._settings.dump_chc:
            fo.save_text(self._settings.dump_chc, inference.chc_report())
            logger.info("clauses written to %s", self._settings.dump_chc)

    #*************
    #*  Running  *
    #*************

    def run(self, text, args=(), filename="<input>", fuel=None):
        # type: (str, list, str, int) -> tuple[Report, Outcome]
        """
        Check `text` and, when accepted, evaluate its elaboration.
        With `args` the last binding is applied to them.

        Returns:
            The report, and the outcome (None when the check failed).
        """
        report = self.check(text, filename)
        if not report.accepted:
            return report, None
        term = program_term(report.target, args)
        outcome = Evaluator(fuel or self._settings.fuel).evaluate(term)
        logger.info("%s: %s after %d steps", filename, outcome.kind, outcome.steps)
        return report, outcome


def outcome_exit_code(outcome):
    # type: (Outcome) -> int
    if isinstance(outcome, Value):
        return EXIT_OK
    if isinstance(outcome, Blame):
        return EXIT_BLAME
    if isinstance(outcome, OutOfFuel):
        return EXIT_FUEL
    return EXIT_ERROR
