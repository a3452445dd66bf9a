"""Well-formedness judgments: classify grammar trees as terms, expressions or
sentences and assign types.

The discipline that matters here: predicate heads must have a solved
Fun(sigma, Bool) type (E023 otherwise), and type holes are solved by
unification with an occurs check, so any annotation forced into the shape
``?h = Proc(?h, T)`` dies with E021 instead of producing a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import ast
from .diagnostics import (
    E_PREDICATE_HEAD,
    E_TYPE_MISMATCH,
    E_UNKNOWN_IDENT,
    E_UNSOLVED_HOLE,
    Span,
    fail,
)
from .types import (
    BASE_TYPES,
    BOOL,
    PROOF,
    PROPOSITION,
    SENTENCE,
    Fun,
    MetaVar,
    MetaVarFactory,
    Opaque,
    Pair,
    Proc,
    TypeExpr,
    apply_subst,
    children,
    contains_metavar,
    rebuild,
    unify,
)


@dataclass(frozen=True)
class Definition:
    """A named, non-recursive definition; formula-bodied or term-bodied."""

    name: str
    params: tuple[tuple[str, TypeExpr], ...]
    body: ast.Node
    is_formula: bool
    result_type: TypeExpr | None = None  # inferred body type for term definitions

    def value_type(self) -> TypeExpr:
        result = PROPOSITION if self.is_formula else self.result_type
        if not self.params:
            return result
        domain = self.params[0][1]
        for _, t in self.params[1:]:
            domain = Pair(domain, t)
        return Fun(domain, result)


@dataclass(frozen=True)
class TypingContext:
    """Immutable snapshot of what names mean while checking one declaration."""

    constants: dict = field(default_factory=dict)      # name -> TypeExpr
    definitions: dict = field(default_factory=dict)    # name -> Definition
    type_names: frozenset = frozenset()                # registered opaque types, e.g. "Set(Nat)"
    type_abbrevs: dict = field(default_factory=dict)   # name -> TypeExpr
    bindings: tuple = ()                               # scope-ordered (name, TypeExpr)

    def bind(self, name: str, type_: TypeExpr) -> "TypingContext":
        return replace(self, bindings=self.bindings + ((name, type_),))

    def lookup_binding(self, name: str) -> TypeExpr | None:
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        return None


class Inferencer:
    """One declaration's elaboration: owns the substitution and hole table."""

    def __init__(self, ctx: TypingContext):
        self.ctx = ctx
        self.subst: dict = {}
        self.factory = MetaVarFactory()
        self.holes: dict[str, MetaVar] = {}

    # -- type resolution --

    def resolve_type(self, t: TypeExpr, span: Span) -> TypeExpr:
        if isinstance(t, Opaque):
            if t.name.startswith("?"):
                name = t.name[1:]
                if name not in self.holes:
                    self.holes[name] = self.factory.fresh(name)
                return self.holes[name]
            if not t.args and t.name in self.ctx.type_abbrevs:
                return self.ctx.type_abbrevs[t.name]
            resolved = Opaque(t.name, tuple(self.resolve_type(a, span) for a in t.args))
            if str(resolved) not in self.ctx.type_names:
                fail(E_UNKNOWN_IDENT, f"unknown type {resolved}", span)
            return resolved
        kids = children(t)
        if not kids:
            return t
        return rebuild(t, tuple(self.resolve_type(k, span) for k in kids))

    def solved(self, t: TypeExpr) -> TypeExpr:
        return apply_subst(t, self.subst)

    def unify_at(self, a: TypeExpr, b: TypeExpr, span: Span) -> None:
        self.subst = unify(a, b, self.subst, span)

    def fresh(self, hint: str = "") -> MetaVar:
        return self.factory.fresh(hint)

    # -- terms and expressions --

    def infer(self, node: ast.Node, role: str) -> TypeExpr:
        if isinstance(node, ast.NatLit):
            return BASE_TYPES["Nat"]
        if isinstance(node, ast.StrLit):
            return BASE_TYPES["String"]
        if isinstance(node, ast.BoolLit):
            return BOOL
        if isinstance(node, (ast.Var, ast.ConstRef)):
            return self.lookup_value(node.name, node.span)
        if isinstance(node, ast.Apply):
            fn_type = self.infer(node.fn, role)
            arg_type = self.infer(node.arg, role)
            result = self.fresh("r")
            self.unify_at(fn_type, Fun(arg_type, result), node.span)
            return result
        if isinstance(node, ast.ProcApply):
            if role != "expr":
                fail(E_TYPE_MISMATCH, "procedure application p.[x] is an expression, not a term", node.span)
            fn_type = self.infer(node.fn, role)
            arg_type = self.infer(node.arg, role)
            result = self.fresh("r")
            self.unify_at(fn_type, Proc(arg_type, result), node.span)
            return result
        if isinstance(node, ast.Lambda):
            var_type = self.resolve_type(node.var_type, node.span)
            inner = Inscope(self, node.var, var_type)
            with inner:
                body_type = self.infer_body(node.body, role)
            return Proc(var_type, body_type) if role == "expr" else Fun(var_type, body_type)
        if isinstance(node, ast.PairTerm):
            return Pair(self.infer(node.first, role), self.infer(node.second, role))
        if isinstance(node, ast.Conditional):
            guard_type = self.infer(node.guard, role)
            self.unify_at(guard_type, BOOL, node.guard.span)
            if ast.is_formula_shape(node.then_branch) or ast.is_formula_shape(node.else_branch):
                fail(E_TYPE_MISMATCH, "a sentence conditional cannot appear in term position", node.span)
            then_type = self.infer(node.then_branch, role)
            else_type = self.infer(node.else_branch, role)
            self.unify_at(then_type, else_type, node.span)
            return then_type
        if isinstance(node, ast.LetExpr):
            if role != "expr":
                fail(E_TYPE_MISMATCH, "Let groups are expressions, not terms", node.span)
            saved = self.ctx
            try:
                for name, _ in node.bindings:
                    self.ctx = self.ctx.bind(name, self.fresh(name))
                for name, rhs in node.bindings:
                    rhs_type = self.infer(rhs, role)
                    self.unify_at(self.ctx.lookup_binding(name), rhs_type, rhs.span)
                return self.infer(node.body, role)
            finally:
                self.ctx = saved
        if isinstance(node, ast.Quote):
            if ast.is_formula_shape(node.inner):
                self.check_sentence(node.inner)
                return SENTENCE
            return self.infer(node.inner, role)
        if isinstance(node, ast.Abstract):
            if ast.is_formula_shape(node.inner):
                self.check_sentence(node.inner)
                return PROPOSITION
            return self.infer(node.inner, role)
        if isinstance(node, ast.Relation):
            # Relations double as Boolean-valued terms inside predicate bodies.
            self.infer(node.left, role)
            self.infer(node.right, role)
            return BOOL
        if ast.is_formula_shape(node):
            fail(E_TYPE_MISMATCH, "a sentence cannot appear in term position", node.span)
        fail(E_TYPE_MISMATCH, f"cannot type node {type(node).__name__}", node.span)

    def infer_body(self, node: ast.Node, role: str) -> TypeExpr:
        return self.infer(node, role)

    def lookup_value(self, name: str, span: Span) -> TypeExpr:
        bound = self.ctx.lookup_binding(name)
        if bound is not None:
            return bound
        if name in self.ctx.constants:
            return self.ctx.constants[name]
        if name in self.ctx.definitions:
            d = self.ctx.definitions[name]
            t = d.value_type()
            if t is None:
                fail(E_TYPE_MISMATCH, f"definition {name} has no value type", span)
            return t
        fail(E_UNKNOWN_IDENT, f"unknown identifier {name}", span)

    # -- sentences --

    def check_sentence(self, node: ast.Node) -> None:
        if isinstance(node, ast.Not):
            self.check_sentence(node.child)
            return
        if isinstance(node, (ast.And, ast.Or, ast.Implies, ast.Iff)):
            self.check_sentence(node.left)
            self.check_sentence(node.right)
            return
        if isinstance(node, (ast.Var, ast.ConstRef)):
            t = self.solved(self.lookup_value(node.name, node.span))
            if t != PROPOSITION and not (node.name in self.ctx.definitions and self.ctx.definitions[node.name].is_formula):
                fail(E_TYPE_MISMATCH, f"{node.name} : {t} is not a Proposition", node.span)
            return
        if isinstance(node, ast.Apply):
            self.check_predicate_application(node)
            return
        if isinstance(node, ast.Relation):
            self.infer(node.left, "term")
            self.infer(node.right, "term")
            return
        if isinstance(node, ast.TypeJudgment):
            self.infer(node.term, "term")
            self.resolve_type(node.type_, node.span)
            return
        if isinstance(node, (ast.Forall, ast.Exists)):
            var_type = self.resolve_type(node.var_type, node.span)
            with Inscope(self, node.var, var_type):
                self.check_sentence(node.body)
            return
        if isinstance(node, ast.Turnstile):
            for part in node.antecedents + node.consequents:
                self.check_sentence(part)
            return
        if isinstance(node, ast.ProofTurnstile):
            proof_type = self.infer(node.proof, "term")
            self.unify_at(proof_type, PROOF, node.proof.span)
            self.check_sentence(node.body)
            return
        if isinstance(node, ast.Conditional):
            guard_type = self.infer(node.guard, "term")
            self.unify_at(guard_type, BOOL, node.guard.span)
            self.check_sentence(node.then_branch)
            self.check_sentence(node.else_branch)
            return
        fail(E_TYPE_MISMATCH, f"{type(node).__name__} is not a sentence", node.span)

    def check_predicate_application(self, node: ast.Apply) -> None:
        if isinstance(node.fn, ast.ConstRef) and node.fn.name in self.ctx.definitions:
            d = self.ctx.definitions[node.fn.name]
            if d.is_formula and d.params:
                args = flatten_args(node.arg, len(d.params))
                if args is None:
                    fail(E_TYPE_MISMATCH, f"{d.name} takes {len(d.params)} argument(s)", node.span)
                for (pname, ptype), arg in zip(d.params, args):
                    arg_type = self.infer(arg, "term")
                    self.unify_at(arg_type, ptype, arg.span)
                return
        head_type = self.solved(self.infer(node.fn, "term"))
        if not isinstance(head_type, Fun) or self.solved(head_type.codomain) != BOOL:
            fail(
                E_PREDICATE_HEAD,
                f"predicate head has type {head_type}, not Fun(_, Bool) for a strict type",
                node.fn.span,
            )
        domain = self.solved(head_type.domain)
        if contains_metavar(domain):
            fail(E_PREDICATE_HEAD, f"predicate head domain {domain} is not a strict type", node.fn.span)
        arg_type = self.infer(node.arg, "term")
        self.unify_at(arg_type, domain, node.arg.span)

    def require_solved(self, span: Span) -> None:
        for name, mv in self.holes.items():
            t = self.solved(mv)
            if contains_metavar(t):
                fail(E_UNSOLVED_HOLE, f"type hole ?{name} was never solved", span)


class Inscope:
    """Context-manager binding one variable in an Inferencer for a subtree."""

    def __init__(self, inf: Inferencer, name: str, type_: TypeExpr):
        self.inf = inf
        self.name = name
        self.type_ = type_

    def __enter__(self) -> None:
        self.saved = self.inf.ctx
        self.inf.ctx = self.inf.ctx.bind(self.name, self.type_)

    def __exit__(self, *exc) -> None:
        self.inf.ctx = self.saved


def flatten_args(arg: ast.Node, arity: int) -> list[ast.Node] | None:
    """Undo the pair-spine sugar of f[a, b, ...] for an arity-n definition."""
    if arity == 1:
        return [arg]
    if isinstance(arg, ast.PairTerm):
        init = flatten_args(arg.first, arity - 1)
        if init is not None:
            return init + [arg.second]
    return None


def infer_term(ctx: TypingContext, node: ast.Node) -> TypeExpr:
    """The unique type of a term under ctx; residual holes may remain."""
    inf = Inferencer(ctx)
    return inf.solved(inf.infer(node, "term"))


def infer_expression(ctx: TypingContext, node: ast.Node) -> TypeExpr:
    inf = Inferencer(ctx)
    return inf.solved(inf.infer(node, "expr"))


def check_sentence(ctx: TypingContext, node: ast.Node) -> None:
    """Raise unless node is generated by the sentence grammar under ctx."""
    inf = Inferencer(ctx)
    inf.check_sentence(node)
    inf.require_solved(node.span)
