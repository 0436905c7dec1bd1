"""Errors and diagnostics.

Every failure the checker can report is a subclass of `ShapecastError`.
Library code raises them; the controller turns them into `Diagnostic`
records and exit codes.
"""
from dataclasses import dataclass, field
from typing import Any


class ShapecastError(Exception):
    """
    Base class of the checker's errors.

    Args:
        `message`: Human readable explanation.

        `span` (optional): Source position of the offending node.

        `rule` (optional): Name of the typing or cast rule that failed.
    """
    rule = "error"

    def __init__(self, message, span=None, rule=None):
        super().__init__(message)
        self.message = message
        self.span = span
        if rule:
            self.rule = rule

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return where + self.message


class ParseError(ShapecastError):
    """Syntax error, with the set of tokens that would have been accepted."""
    rule = "parse"

    def __init__(self, message, span=None, expected=()):
        super().__init__(message, span)
        self.expected = tuple(expected)


class WfError(ShapecastError):
    """Ill-sorted refinement, or a type that mentions an out-of-scope variable."""
    rule = "wf"

    def __init__(self, message, span=None, subterm=None, sort=None):
        super().__init__(message, span)
        self.subterm = subterm
        self.sort = sort


class UnificationError(ShapecastError):
    """Clash or occurs-check failure during simple type inference."""
    rule = "simple-type"

    def __init__(self, left, right, span=None):
        super().__init__(f"cannot unify {left} with {right}", span)
        self.left = left
        self.right = right


class UnboundVariable(ShapecastError):
    rule = "scope"

    def __init__(self, name, span=None):
        super().__init__(f"unbound variable {name}", span)
        self.name = name


class RejectedCast(ShapecastError):
    """A consistent subtyping check found the two refinements disjoint."""
    rule = "Cast-Base-reject"

    def __init__(self, message, span=None, witness=None):
        super().__init__(message, span)
        self.witness = witness


class ShapeMismatch(ShapecastError):
    """Two types were compared whose simple-type erasures differ."""
    rule = "erasure"


class TargetTypeError(ShapecastError):
    rule = "CT"


class EvalError(ShapecastError):
    """
    Evaluation of a size, shape or predicate failed
    (division by zero, index out of range, incompatible shapes...).
    """
    rule = "eval"

    def __init__(self, kind, subterm=None, span=None):
        super().__init__(f"{kind}" + (f" in {subterm}" if subterm is not None else ""), span)
        self.kind = kind
        self.subterm = subterm


class EncodingError(ShapecastError):
    rule = "smtlib"


class InferenceFailed(ShapecastError):
    """Shape parameters of a polymorphic binding could not be inferred at a call site."""
    rule = "PT-Var"


class StructureMismatch(ShapecastError):
    """Two terms compared for precision are not congruent."""
    rule = "precision"


@dataclass
class Diagnostic:
    """
    One entry of a check report.

    `severity` is one of "error", "warning" or "info".
    """
    severity: str
    rule: str
    message: str
    span: Any = None
    witness: dict = field(default=None)

    @classmethod
    def from_error(cls, exc):
        # type: (ShapecastError) -> Diagnostic
        """Build an error diagnostic out of a raised `ShapecastError`."""
        return cls("error", exc.rule, exc.message, exc.span, getattr(exc, "witness", None))

    def to_dict(self):
        """Return the JSON-ready form documented in docs/diagnostics.md."""
        span = None
        if self.span is not None:
            span = {"line": self.span.line, "col": self.span.col}
        witness = None
        if self.witness:
            witness = {k: list(v) if isinstance(v, tuple) else v for k, v in self.witness.items()}
        return {
            "severity": self.severity,
            "rule": self.rule,
            "message": self.message,
            "span": span,
            "witness": witness,
        }
