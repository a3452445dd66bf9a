"""File-level checking: run a .dlp source through parse -> typecheck -> deduction.

Declarations are processed in file order against an immutable theory
environment; the first diagnostic stops the file.  Axioms supplied on the
command line (--admit-unsound-axiom) are elaborated lazily so they may mention
constants the file declares first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .abstraction import abstract_sentence
from .deduction import register_theorem
from .diagnostics import Diagnostic, DiagnosticError
from .parser import ConstantDecl, DefDecl, ProofDecl, SourceFile, UseDecl, parse_file, parse_formula
from .theories import TheoryEnv, add_definition, load_theory
from .typecheck import Inferencer


@dataclass
class FileResult:
    path: str
    verified: tuple[str, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()
    env: TheoryEnv | None = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "outcome": "verified" if self.ok else "error",
            "verified": list(self.verified),
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }


def gather_packs(source: SourceFile, extra: tuple[str, ...] = ()) -> tuple[str, ...]:
    packs = list(extra)
    for decl in source.declarations:
        if isinstance(decl, UseDecl):
            for p in decl.packs:
                if p not in packs:
                    packs.append(p)
    return tuple(packs)


def _inject_admitted(env: TheoryEnv, pending: dict[str, str]) -> TheoryEnv:
    """Try to elaborate command-line axioms; leave unresolvable ones pending."""
    for name in list(pending):
        text = pending[name]
        try:
            prop = abstract_sentence(env.typing_context(), parse_formula(text), theory=env.name)
        except DiagnosticError:
            continue
        env = env.with_axiom(name, prop, text)
        del pending[name]
    return env


def check_source(
    text: str,
    path: str = "<input>",
    theory_packs: tuple[str, ...] = (),
    admit_axioms: tuple[str, ...] = (),
) -> FileResult:
    """Check every declaration of one source text; stop at the first diagnostic."""
    try:
        source = parse_file(text, path)
        env = load_theory(gather_packs(source, theory_packs))
    except DiagnosticError as e:
        return FileResult(path, diagnostics=(e.diagnostic,))
    pending = {f"Admitted{i}": formula for i, formula in enumerate(admit_axioms, start=1)}
    verified: list[str] = []
    try:
        for decl in source.declarations:
            if isinstance(decl, UseDecl):
                continue
            if isinstance(decl, ConstantDecl):
                inf = Inferencer(env.typing_context())
                resolved = inf.resolve_type(decl.type_, decl.type_span)
                inf.require_solved(decl.type_span)
                env = env.with_constant(decl.name, resolved, decl.span)
                continue
            if isinstance(decl, DefDecl):
                env = add_definition(env, decl.name, decl.params, decl.body, decl.span)
                continue
            if isinstance(decl, ProofDecl):
                if pending:
                    env = _inject_admitted(env, pending)
                env, _ = register_theorem(env, decl.name, decl)
                verified.append(decl.name)
    except DiagnosticError as e:
        return FileResult(path, tuple(verified), (e.diagnostic,), env)
    return FileResult(path, tuple(verified), (), env)


def check_file(
    path: str,
    theory_packs: tuple[str, ...] = (),
    admit_axioms: tuple[str, ...] = (),
) -> FileResult:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return check_source(text, path, theory_packs, admit_axioms)
