"""View module.

This module stores the View class, which turns check reports,
run outcomes and property totals into the text or JSON
printed on the terminal.
"""
import json
import sys
from typing import TYPE_CHECKING, TextIO

from model.printer import print_type, print_witness
from model.runtime import Blame, Value

if TYPE_CHECKING:
    from model.gradual import PropertyReport
    from model.model import Report
    from model.runtime import Outcome


class View:
    """
    View.

    This class renders every result of the program,
    either as human readable lines or as one JSON document.
    """

    def __init__(self, json_output=False, stream=None):
        # type: (bool, TextIO) -> None
        self.json = json_output
        self.stream = stream or sys.stdout

    def _print(self, text=""):
        print(text, file=self.stream)

    def _dump(self, data):
        self._print(json.dumps(data, indent=2, default=str))

    #*************
    #*  Reports  *
    #*************

    def report_dict(self, report, emit=False):
        # type: (Report, bool) -> dict
        """JSON-ready summary of a check report."""
        data = {
            "file": report.filename,
            "status": report.status,
            "exit_code": report.exit_code,
            "types": {name: print_type(ty) for name, ty in report.types.items()},
            "asserts": report.asserts,
            "checks": report.checks,
            "diagnostics": [d.to_dict() for d in report.diagnostics],
        }
        if emit:
            data["elaborated"] = report.elaborated_text()
        return data

    def show_report(self, report, emit=False, verbose=False):
        # type: (Report, bool, bool) -> None
        """
        Print the diagnostics of `report`, then the inferred types when
        the program was accepted.

        Args:
            `emit`: Also print the elaborated program.

            `verbose`: Include the info diagnostics (runtime checks,
            monomorphic fallbacks).
        """
        if self.json:
            self._dump(self.report_dict(report, emit))
            return
        for diag in report.diagnostics:
            if diag.severity == "info" and not verbose:
                continue
            where = f"{report.filename}:{diag.span}" if diag.span else report.filename
            self._print(f"{where}: {diag.severity} [{diag.rule}] {diag.message}")
            if diag.witness:
                self._print(f"  counterexample: {print_witness(diag.witness)}")
        if not report.accepted:
            self._print(f"{report.filename}: {report.status}")
            return
        for name, ty in report.types.items():
            self._print(f"{name} : {print_type(ty)}")
        self._print(f"{report.filename}: accepted, {report.asserts} runtime check(s)")
        if emit:
            self._print()
            self._print(report.elaborated_text().rstrip())

    #*************
    #*  Outcomes *
    #*************

    def show_outcome(self, outcome):
        # type: (Outcome) -> None
        if self.json:
            data = {"outcome": outcome.kind, "steps": outcome.steps, "result": str(outcome)}
            if isinstance(outcome, Blame):
                data["span"] = str(outcome.span) if outcome.span else None
                data["operands"] = {k: str(v) for k, v in outcome.operands.items()}
            self._dump(data)
            return
        if isinstance(outcome, Value):
            self._print(str(outcome))
        elif isinstance(outcome, Blame):
            self._print(f"blame: {outcome}")
        else:
            self._print(str(outcome))

    #****************
    #*  Properties  *
    #****************

    def show_properties(self, report):
        # type: (PropertyReport) -> None
        if self.json:
            self._dump(report.to_dict())
            return
        self._print(f"{report.cases} cases: {report.ok} ok, "
                    f"{report.skipped} skipped, {len(report.failures)} failed")
        for key, count in sorted(report.outcomes.items()):
            self._print(f"  {' / '.join(key):<28} {count}")
        for failure in report.failures:
            self._print(f"  seed {failure.seed}: {failure.reason}")
