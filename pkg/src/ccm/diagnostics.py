"""Shared error types, source locations, and validation reports."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token or construct in an input text.

    Lines and columns are 1-based; byte offsets are 0-based.
    """

    line: int
    column: int
    offset: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class CcmError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CcmError):
    """Syntax error in a model, formula, spec, or context string."""

    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        self.span = span
        self.expected = expected
        detail = message
        if expected:
            detail += " (expected " + " or ".join(sorted(expected)) + ")"
        super().__init__(f"{span}: {detail}")


class EvaluationError(CcmError):
    """Runtime failure while evaluating an expression (e.g. division by zero)."""

    def __init__(self, message: str, env: dict | None = None):
        self.env = dict(env) if env else None
        super().__init__(message)


class ModelError(CcmError):
    """A model failed validation; carries the offending report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid model:\n" + report.render())


class FormulaError(CcmError):
    """A formula failed well-formedness checks; carries the report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("ill-formed formula:\n" + report.render())


class CombineError(CcmError):
    """Model combination preconditions violated (name clash, range mismatch)."""


class ExpansionLimitError(CcmError):
    """Disconnection expansion would exceed the configured conjunct cap."""


class BudgetError(CcmError):
    """An exhaustive enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class Violation:
    """One well-formedness problem found by a validation pass."""

    kind: str
    message: str
    location: str = ""
    span: SourceSpan | None = None

    def __str__(self) -> str:
        parts = []
        if self.span is not None:
            parts.append(str(self.span))
        if self.location:
            parts.append(self.location)
        prefix = " ".join(parts)
        return (prefix + ": " if prefix else "") + f"[{self.kind}] {self.message}"


@dataclass
class ValidationReport:
    """Accumulated violations; empty means valid."""

    violations: list[Violation] = field(default_factory=list)

    def add(self, kind: str, message: str, location: str = "",
            span: SourceSpan | None = None) -> None:
        self.violations.append(Violation(kind, message, location, span))

    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def render(self) -> str:
        return "\n".join(str(v) for v in self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def __bool__(self) -> bool:
        # Truthy when there *are* violations, so `if report:` reads naturally.
        return bool(self.violations)
