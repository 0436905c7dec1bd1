"""Controller.

This module contains the controller,
which bridges the View and Model of the program:
one method per subcommand, each returning the exit code.
"""
import logging
import os

import matplotlib as mpl

from model import gradual
import model.file_op as fo
from model.model import EXIT_ERROR, EXIT_OK, Model, outcome_exit_code
from model.runtime import parse_value
from model.tools.charts import create_outcome_chart, save_chart
from view.view import View

mpl.use('agg')

logger = logging.getLogger(__name__)


class Controller:
    """
    Controller.

    This class bridges the View and Model of the program.
    """
    def __init__(self, settings=None, view=None):
        """
        Create model and view. `settings` (the command-line flags
        that were given) override the ones read from the settings files.
        """
        self.model = Model()
        if settings:
            self.model.set_settings(**settings)
        self.view = view or View(self.model.get_settings()["json"])

    def _read(self, filepath):
        # type: (str) -> str | None
        try:
            return self.model.load_text(filepath)
        except (FileNotFoundError, AttributeError) as exc:
            logger.error("%s", exc)
            return None

    #**************
    #*  Commands  *
    #**************

    def check(self, filepath, emit=False, verbose=False):
        # type: (str, bool, bool) -> int
        """Check a program and print its diagnostics and types."""
        text = self._read(filepath)
        if text is None:
            return EXIT_ERROR
        report = self.model.check(text, os.path.basename(filepath))
        self.view.show_report(report, emit=emit, verbose=verbose)
        return report.exit_code

    def elaborate(self, filepath, out=None, verbose=False):
        # type: (str, str, bool) -> int
        """
        Check a program and print its elaboration, or write it to `out`.
        Nothing is written for a program that is not accepted.
        """
        if out is None:
            return self.check(filepath, emit=True, verbose=verbose)
        text = self._read(filepath)
        if text is None:
            return EXIT_ERROR
        report = self.model.check(text, os.path.basename(filepath))
        self.view.show_report(report, verbose=verbose)
        if report.accepted:
            fo.save_text(out, report.elaborated_text() + "\n")
            logger.info("elaboration written to %s", out)
        return report.exit_code

    def run(self, filepath, args=(), fuel=None):
        # type: (str, list[str], int) -> int
        """
        Check a program and evaluate it, applying its last binding to
        `args` when some are given.
        """
        text = self._read(filepath)
        if text is None:
            return EXIT_ERROR
        try:
            values = [parse_value(a) for a in args]
        except ValueError as exc:
            logger.error("bad argument: %s", exc)
            return EXIT_ERROR
        report, outcome = self.model.run(text, values, os.path.basename(filepath), fuel)
        if outcome is None:
            self.view.show_report(report)
            return report.exit_code
        self.view.show_outcome(outcome)
        return outcome_exit_code(outcome)

    def proptest(self, cases=100, seed=0, fuel=None, size=3, plot=None):
        # type: (int, int, int, int, str) -> int
        """Run the gradual guarantee checks over generated program pairs."""
        report = gradual.run_properties(self.model, cases, seed, fuel, size)
        self.view.show_properties(report)
        if plot:
            save_chart(create_outcome_chart(report), plot)
            logger.info("chart written to %s", plot)
        return EXIT_OK if report.passed else EXIT_ERROR
