"""Coded, located error reports shared by the parser, type checker and proof checker."""

from __future__ import annotations

from dataclasses import dataclass, field


# Stable diagnostic codes.  Tools match on these, never on message text.
E_SYNTAX = "E001"            # unexpected token, unbalanced bracket, bad binder
E_UNKNOWN_IDENT = "E010"     # unknown identifier
E_TYPE_MISMATCH = "E020"     # type constructor mismatch
E_OCCURS_CHECK = "E021"      # occurs-check failure (the fixed-point hole)
E_UNSOLVED_HOLE = "E022"     # unsolved type hole left at the end of a declaration
E_PREDICATE_HEAD = "E023"    # predicate head has no strict function-to-Boolean type
E_RULE_MISMATCH = "E030"     # derivation step does not match its rule schema
E_FRESHNESS = "E031"         # witness or eigenvariable escapes its scope
E_DANGLING_REF = "E032"      # justification references a missing or invisible step
E_GOAL_MISMATCH = "E033"     # final step does not establish the stated goal
E_DUPLICATE_NAME = "E034"    # duplicate definition/theorem name
E_SELF_REFERENCE = "E035"    # definition mentions itself, directly or transitively
E_FREE_VARIABLES = "E040"    # abstraction/evaluation of a term with free variables
E_BUDGET_EXHAUSTED = "E050"  # evaluation not shown to converge within the step budget
E_STUCK = "E051"             # evaluation stuck (internal error if typing was correct)
E_BAD_CASE_HEADER = "E060"   # malformed corpus case header


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) into a source text, with 1-based line/column."""

    start: int
    end: int
    line: int
    column: int

    @property
    def length(self) -> int:
        return self.end - self.start

    def to_json(self) -> dict:
        return {"line": self.line, "column": self.column, "length": self.length}

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


NO_SPAN = Span(0, 0, 1, 1)


def span_from_offsets(text: str, start: int, end: int) -> Span:
    """Build a Span for text[start:end], computing the 1-based line/column of start."""
    line = text.count("\n", 0, start) + 1
    bol = text.rfind("\n", 0, start) + 1
    return Span(start, end, line, start - bol + 1)


@dataclass(frozen=True)
class Diagnostic:
    """A single coded error with its primary source span and optional notes."""

    code: str
    message: str
    span: Span = NO_SPAN
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": self.span.to_json(),
            "notes": list(self.notes),
        }

    def __str__(self) -> str:
        return f"error[{self.code}] {self.span}: {self.message}"


class DiagnosticError(Exception):
    """Raised by kernel operations when checking fails; carries the Diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic

    @property
    def code(self) -> str:
        return self.diagnostic.code


def fail(code: str, message: str, span: Span = NO_SPAN, notes: tuple[str, ...] = ()) -> "NoReturn":  # noqa: F821
    raise DiagnosticError(Diagnostic(code, message, span, notes))
