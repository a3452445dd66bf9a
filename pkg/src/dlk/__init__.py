"""direct-logic-kernel: a proof-checking kernel for a typed grammar of
mathematical sentences with natural-deduction verification."""

from .abstraction import EvalBudget, PropositionNode, abstract_sentence, abstract_term, evaluate
from .checker import FileResult, check_file, check_source
from .corpus import CorpusCase, CorpusReport, run_corpus
from .deduction import RULE_NAMES, Verified, apply_rule, check_derivation, register_theorem
from .diagnostics import Diagnostic, DiagnosticError, Span
from .parser import SourceFile, parse_file, parse_formula, parse_term, parse_type
from .render import render, render_type
from .theories import TheoryEnv, add_definition, load_theory
from .typecheck import TypingContext, check_sentence, infer_expression, infer_term
from .types import Substitution, TypeExpr, unify, wf_type

__all__ = [
    "CorpusCase",
    "CorpusReport",
    "Diagnostic",
    "DiagnosticError",
    "EvalBudget",
    "FileResult",
    "PropositionNode",
    "RULE_NAMES",
    "SourceFile",
    "Span",
    "Substitution",
    "TheoryEnv",
    "TypeExpr",
    "TypingContext",
    "Verified",
    "abstract_sentence",
    "abstract_term",
    "add_definition",
    "apply_rule",
    "check_derivation",
    "check_file",
    "check_sentence",
    "check_source",
    "evaluate",
    "infer_expression",
    "infer_term",
    "load_theory",
    "parse_file",
    "parse_formula",
    "parse_term",
    "parse_type",
    "register_theorem",
    "render",
    "render_type",
    "run_corpus",
    "unify",
    "wf_type",
]
