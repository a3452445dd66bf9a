"""Deterministic rendering of grammar trees back to surface syntax.

The contract is parse(render(x)) == x, name-exact.  Output is canonical: one
spelling per tree, minimal parentheses except where a binder body would
otherwise swallow a following operator.
"""

from __future__ import annotations

from . import ast
from .types import Base, Fun, MetaVar, Opaque, Pair, Proc, TermOf, TypeExpr, Union

# Precedence: turnstile(0) < iff(1) < implies(2) < or(3) < and(4) < not(5) < relation(6) < atom(7).
_PREC = {
    ast.Iff: 1,
    ast.Implies: 2,
    ast.Or: 3,
    ast.And: 4,
    ast.Not: 5,
    ast.Relation: 6,
    ast.TypeJudgment: 6,
    ast.Forall: 1,
    ast.Exists: 1,
    ast.Lambda: 1,
    ast.LetExpr: 1,
}


def render_type(t: TypeExpr) -> str:
    if isinstance(t, Base):
        return t.name
    if isinstance(t, Union):
        return f"Union({render_type(t.left)}, {render_type(t.right)})"
    if isinstance(t, Pair):
        return f"Pair({render_type(t.first)}, {render_type(t.second)})"
    if isinstance(t, Proc):
        return f"Proc({render_type(t.domain)}, {render_type(t.codomain)})"
    if isinstance(t, Fun):
        return f"Fun({render_type(t.domain)}, {render_type(t.codomain)})"
    if isinstance(t, TermOf):
        return f"Term({render_type(t.inner)})"
    if isinstance(t, Opaque):
        if t.name.startswith("?"):
            return t.name
        if t.args:
            return f"{t.name}({', '.join(render_type(a) for a in t.args)})"
        return t.name
    if isinstance(t, MetaVar):
        return str(t)
    raise TypeError(f"cannot render type {t!r}")


def _prec(node: ast.Node) -> int:
    return _PREC.get(type(node), 7)


def _dangling(node: ast.Node) -> bool:
    """True when the node's rightmost edge is an open binder body."""
    if isinstance(node, (ast.Forall, ast.Exists, ast.Lambda)):
        return True
    if isinstance(node, ast.Not):
        return _dangling(node.child)
    if isinstance(node, (ast.And, ast.Or, ast.Implies, ast.Iff)):
        return _dangling(node.right)
    if isinstance(node, ast.Relation):
        return _dangling(node.right)
    if isinstance(node, ast.LetExpr):
        return _dangling(node.body)
    return False


def render(node: ast.Node) -> str:
    if isinstance(node, ast.Turnstile):
        return _turnstile_body(node)
    if isinstance(node, ast.ProofTurnstile):
        return f"|-[{_r(node.proof, 1)}] {_r(node.body, 2)}"
    return _r(node, 0)


def _turnstile_body(node: ast.Turnstile) -> str:
    parts = []
    if node.antecedents:
        parts.append(", ".join(_r(a, 1) for a in node.antecedents))
        parts.append(" ")
    parts.append("|- ")
    parts.append(", ".join(_r(c, 1) for c in node.consequents))
    return "".join(parts)


def _left(node: ast.Node, min_prec: int) -> str:
    if _dangling(node):
        return f"({_bare(node)})"
    return _r(node, min_prec)


def _r(node: ast.Node, min_prec: int) -> str:
    p = _prec(node)
    text = _bare(node)
    if p < min_prec and not _self_delimiting(node):
        return f"({text})"
    return text


def _self_delimiting(node: ast.Node) -> bool:
    return isinstance(node, (ast.Turnstile, ast.ProofTurnstile, ast.Conditional, ast.PairTerm, ast.Quote, ast.Abstract))


def _bare(node: ast.Node) -> str:
    if isinstance(node, (ast.Var, ast.ConstRef)):
        if node.name == "EmptySet":
            return "{}"
        return node.name
    if isinstance(node, ast.NatLit):
        return str(node.value)
    if isinstance(node, ast.StrLit):
        return f'"{node.value}"'
    if isinstance(node, ast.BoolLit):
        return "True" if node.value else "False"
    if isinstance(node, ast.Not):
        return f"not {_r(node.child, 5)}"
    if isinstance(node, ast.And):
        return f"{_left(node.left, 4)} /\\ {_r(node.right, 5)}"
    if isinstance(node, ast.Or):
        return f"{_left(node.left, 3)} \\/ {_r(node.right, 4)}"
    if isinstance(node, ast.Implies):
        return f"{_left(node.left, 3)} => {_r(node.right, 2)}"
    if isinstance(node, ast.Iff):
        return f"{_left(node.left, 1)} <=> {_r(node.right, 2)}"
    if isinstance(node, ast.Relation):
        return f"{_r(node.left, 7)} {node.op} {_r(node.right, 7)}"
    if isinstance(node, ast.TypeJudgment):
        return f"{_r(node.term, 7)} : {render_type(node.type_)}"
    if isinstance(node, (ast.Forall, ast.Exists)):
        word = "forall" if isinstance(node, ast.Forall) else "exists"
        return f"{word} [{node.var}: {render_type(node.var_type)}] -> {_r(node.body, 1)}"
    if isinstance(node, ast.Lambda):
        return f"[{node.var}: {render_type(node.var_type)}] -> {_r(node.body, 1)}"
    if isinstance(node, (ast.Turnstile, ast.ProofTurnstile)):
        return f"({render(node)})"
    if isinstance(node, ast.Conditional):
        return f"({_r(node.guard, 1)} ? {_branch(node.then_branch)} : {_branch(node.else_branch)})"
    if isinstance(node, ast.PairTerm):
        return f"({_r(node.first, 1)}, {_r(node.second, 1)})"
    if isinstance(node, ast.Apply):
        return _application(node)
    if isinstance(node, ast.ProcApply):
        return f"{_r(node.fn, 7)}.[{_argument(node.arg)}]"
    if isinstance(node, ast.LetExpr):
        bindings = ", ".join(f"{name} := {_argument(rhs)}" for name, rhs in node.bindings)
        return f"Let {{{bindings}}}, {_argument(node.body)}"
    if isinstance(node, ast.Quote):
        return f"quote({_r(node.inner, 1)})"
    if isinstance(node, ast.Abstract):
        return f"abstract({_r(node.inner, 1)})"
    raise TypeError(f"cannot render node {node!r}")


def _branch(node: ast.Node) -> str:
    if isinstance(node, ast.TypeJudgment) or isinstance(node, ast.Iff) or _dangling(node):
        return f"({_bare(node)})"
    return _r(node, 2)


def _argument(node: ast.Node) -> str:
    # Arguments admit bare lambdas; everything looser is parenthesized by _r.
    return _r(node, 1) if isinstance(node, ast.Lambda) else _r(node, 7)


def _application(node: ast.Apply) -> str:
    fn = node.fn
    if isinstance(fn, ast.ConstRef):
        if fn.name in ast.INFIX_PREDICATES and isinstance(node.arg, ast.PairTerm):
            return f"{_r(node.arg.first, 7)} {fn.name} {_r(node.arg.second, 7)}"
        if fn.name == "Singleton":
            return f"{{{_r(node.arg, 1)}}}"
    args = _flatten_pair_spine(node.arg)
    rendered = ", ".join(_argument(a) for a in args)
    return f"{_r(fn, 7)}[{rendered}]"


def _flatten_pair_spine(arg: ast.Node) -> list[ast.Node]:
    if isinstance(arg, ast.PairTerm):
        return _flatten_pair_spine(arg.first) + [arg.second]
    return [arg]
