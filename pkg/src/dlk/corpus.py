"""Two-sided executable corpus: positive scripts that must verify, negative
constructions that must fail with a specific code at a specific spot.

Case headers are comment lines at the top of each .dlp file:

    // expect: verified
    // expect: error E021 at "f.[x.[x]]"
    // theory: nat, sets
    // description: one line

An `at "..."` clause pins the diagnostic span: the quoted text must occur
exactly once in the file and the primary span must lie inside it.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .checker import check_source
from .diagnostics import Diagnostic, E_BAD_CASE_HEADER

_EXPECT_RE = re.compile(r"^//\s*expect:\s*(verified|error\s+(E\d{3})(?:\s+at\s+\"([^\"]*)\")?)\s*$")
_THEORY_RE = re.compile(r"^//\s*theory:\s*(.*)$")
_DESCRIPTION_RE = re.compile(r"^//\s*description:\s*(.*)$")


@dataclass(frozen=True)
class CorpusCase:
    path: str
    text: str
    expect_verified: bool
    expected_code: str | None = None
    span_substring: str | None = None
    description: str = ""
    packs: tuple[str, ...] = ()


@dataclass(frozen=True)
class CaseResult:
    path: str
    expected: str
    outcome: str
    passed: bool
    message: str = ""
    diagnostics: tuple[Diagnostic, ...] = ()

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "expected": self.expected,
            "outcome": self.outcome,
            "passed": self.passed,
            "message": self.message,
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }


@dataclass(frozen=True)
class CorpusReport:
    results: tuple[CaseResult, ...]
    wall_time_s: float

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total

    def to_json(self) -> dict:
        return {
            "status": "ok" if self.all_passed else "failed",
            "cases": [r.to_json() for r in self.results],
            "totals": {"total": self.total, "passed": self.passed, "failed": self.total - self.passed},
            "wall_time_s": self.wall_time_s,
        }


def builtin_corpus_dir() -> Path:
    return Path(resources.files("dlk") / "corpus_data")


def parse_case(text: str, path: str) -> CorpusCase:
    """Read the comment header of a case file; E060 when it is malformed."""
    expect_line = None
    packs: tuple[str, ...] = ()
    description = ""
    for raw in text.splitlines():
        line = raw.strip()
        if not line.startswith("//"):
            if line:
                break
            continue
        m = _EXPECT_RE.match(line)
        if m:
            if expect_line is not None:
                raise _header_error(path, "duplicate expect line")
            expect_line = m
            continue
        m = _THEORY_RE.match(line)
        if m:
            packs = tuple(p.strip() for p in m.group(1).split(",") if p.strip())
            continue
        m = _DESCRIPTION_RE.match(line)
        if m:
            description = m.group(1)
            continue
        if line.startswith("// expect:"):
            raise _header_error(path, f"unreadable expect line {line!r}")
    if expect_line is None:
        raise _header_error(path, "missing `// expect:` line")
    if expect_line.group(1) == "verified":
        return CorpusCase(path, text, True, None, None, description, packs)
    return CorpusCase(path, text, False, expect_line.group(2), expect_line.group(3), description, packs)


def _header_error(path: str, reason: str):
    from .diagnostics import DiagnosticError

    return DiagnosticError(Diagnostic(E_BAD_CASE_HEADER, f"{path}: {reason}"))


def run_case(case: CorpusCase, admit_axioms: tuple[str, ...] = ()) -> CaseResult:
    result = check_source(case.text, case.path, case.packs, admit_axioms)
    expected = "verified" if case.expect_verified else f"error {case.expected_code}"
    if case.expect_verified:
        if result.ok:
            return CaseResult(case.path, expected, "verified", True)
        return CaseResult(
            case.path,
            expected,
            "error",
            False,
            f"expected verification, got {result.diagnostics[0]}",
            result.diagnostics,
        )
    if result.ok:
        return CaseResult(case.path, expected, "verified", False, "expected a diagnostic, file verified")
    diag = result.diagnostics[0]
    if diag.code != case.expected_code:
        return CaseResult(
            case.path, expected, "error", False, f"expected {case.expected_code}, got {diag}", result.diagnostics
        )
    if case.span_substring is not None:
        problem = _span_outside(case.text, diag, case.span_substring)
        if problem:
            return CaseResult(case.path, expected, "error", False, problem, result.diagnostics)
    return CaseResult(case.path, expected, "error", True, "", result.diagnostics)


def _mask_comments(text: str) -> str:
    """Blank out //-comments, preserving every offset, so span anchors are
    located in code rather than in the case header itself."""
    out = []
    for line in text.splitlines(keepends=True):
        idx = line.find("//")
        if idx >= 0:
            body = line[idx:].rstrip("\n")
            out.append(line[:idx] + " " * len(body) + line[idx + len(body) :])
        else:
            out.append(line)
    return "".join(out)


def _span_outside(text: str, diag: Diagnostic, needle: str) -> str:
    code = _mask_comments(text)
    first = code.find(needle)
    if first < 0:
        return f"span anchor {needle!r} does not occur in the file"
    if code.find(needle, first + 1) >= 0:
        return f"span anchor {needle!r} occurs more than once in the file"
    lo, hi = first, first + len(needle)
    if not (lo <= diag.span.start and diag.span.end <= hi):
        got = text[diag.span.start : diag.span.end]
        return f"diagnostic span covers {got!r}, outside the anchor {needle!r}"
    return ""


def run_corpus(directory: "str | Path | None" = None, admit_axioms: tuple[str, ...] = ()) -> CorpusReport:
    """Run every .dlp case under directory (default: the shipped corpus)."""
    base = Path(directory) if directory is not None else builtin_corpus_dir()
    started = time.perf_counter()
    results = []
    for path in sorted(base.glob("*.dlp")):
        text = path.read_text(encoding="utf-8")
        try:
            case = parse_case(text, str(path))
        except Exception as e:
            diag = getattr(e, "diagnostic", Diagnostic(E_BAD_CASE_HEADER, str(e)))
            results.append(CaseResult(str(path), "?", "error", False, str(e), (diag,)))
            continue
        results.append(run_case(case, admit_axioms))
    return CorpusReport(tuple(results), time.perf_counter() - started)
