"""The string/sentence/proposition bridge.

Closed sentences abstract to propositions (structural mirrors with canonical
bound names); closed expressions evaluate call-by-value under a step budget.
Budget exhaustion is reported as "not shown to converge" (E050), never as a
divergence claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .diagnostics import (
    E_BUDGET_EXHAUSTED,
    E_FREE_VARIABLES,
    E_STUCK,
    NO_SPAN,
    Span,
    fail,
)
from .typecheck import Inferencer, TypingContext
from .types import TypeExpr


@dataclass(frozen=True)
class EvalBudget:
    max_steps: int = 10_000

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("evaluation budget must be at least 1 step")


@dataclass(frozen=True)
class PropositionNode:
    """An assertable proposition: a closed formula with canonical bound names.

    Equality is alpha-equivalence (normal forms compare structurally).  The
    original sentence, when there was one, is kept for rendering.
    """

    tree: ast.Node
    theory: str = field(default="Mathematics", compare=False)
    source: ast.Node | None = field(default=None, compare=False, repr=False)

    def render_source(self) -> ast.Node:
        return self.source if self.source is not None else self.tree


def proposition_from(node: ast.Node, theory: str = "Mathematics") -> PropositionNode:
    return PropositionNode(ast.alpha_normalize(node), theory, node)


def abstract_sentence(ctx: TypingContext, sentence: ast.Node, theory: str = "Mathematics") -> PropositionNode:
    """Abstract a checked, closed sentence into a proposition.

    Names bound in ctx.bindings count as free variables of the sentence (they
    are not constants of the theory), so their presence is E040.
    """
    from .typecheck import check_sentence

    check_sentence(ctx, sentence)
    free = sorted(
        name
        for name in ast.free_names(sentence)
        if name not in ctx.constants and name not in ctx.definitions
    )
    if free:
        fail(
            E_FREE_VARIABLES,
            f"cannot abstract a sentence with free variables: {', '.join(free)}",
            sentence.span,
        )
    return proposition_from(sentence, theory)


# --- evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class VNat:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class VBool:
    value: bool

    def __str__(self) -> str:
        return "True" if self.value else "False"


@dataclass(frozen=True)
class VStr:
    value: str

    def __str__(self) -> str:
        return f'"{self.value}"'


@dataclass(frozen=True)
class VPair:
    first: object
    second: object

    def __str__(self) -> str:
        return f"({self.first}, {self.second})"


@dataclass(frozen=True)
class VOpaque:
    """A theory constant with no computational rule; applications stay neutral."""

    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if self.args:
            return f"{self.name}[{', '.join(str(a) for a in self.args)}]"
        return self.name


@dataclass
class VClosure:
    param: str
    body: ast.Node
    env: dict  # name -> value; shared dict so recursive Let bindings resolve

    def __str__(self) -> str:
        return f"<procedure [{self.param}]>"

    def __eq__(self, other) -> bool:
        return self is other


class _Placeholder:
    pass


_BUILTINS = {
    "Successor": ("Nat -> Nat", lambda v: VNat(v.value + 1) if isinstance(v, VNat) else None),
    "Length": ("String -> Nat", lambda v: VNat(len(v.value)) if isinstance(v, VStr) else None),
}


class Evaluator:
    def __init__(self, ctx: TypingContext, budget: EvalBudget):
        self.ctx = ctx
        self.remaining = budget.max_steps
        self.budget = budget

    def spend(self, span: Span) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            fail(
                E_BUDGET_EXHAUSTED,
                f"not shown to converge within {self.budget.max_steps} steps",
                span,
            )

    def eval(self, node: ast.Node, env: dict) -> object:
        # Trampoline: tail positions (application bodies, selected branches,
        # Let bodies) loop instead of recursing, so the Python stack stays
        # bounded by expression nesting while the budget does the real work.
        while True:
            if isinstance(node, ast.NatLit):
                return VNat(node.value)
            if isinstance(node, ast.StrLit):
                return VStr(node.value)
            if isinstance(node, ast.BoolLit):
                return VBool(node.value)
            if isinstance(node, (ast.Var, ast.ConstRef)):
                name = node.name
                if name in env:
                    v = env[name]
                    if isinstance(v, _Placeholder):
                        fail(E_STUCK, f"recursive binding {name} consulted before a value exists", node.span)
                    return v
                if name in _BUILTINS or name in self.ctx.constants:
                    return VOpaque(name)
                if name in self.ctx.definitions:
                    d = self.ctx.definitions[name]
                    if d.params or d.is_formula:
                        return VOpaque(name)
                    self.spend(node.span)
                    node, env = d.body, {}
                    continue
                fail(E_FREE_VARIABLES, f"unbound name {name} during evaluation", node.span)
            if isinstance(node, ast.Lambda):
                return VClosure(node.var, node.body, env)
            if isinstance(node, ast.PairTerm):
                return VPair(self.eval(node.first, env), self.eval(node.second, env))
            if isinstance(node, (ast.Apply, ast.ProcApply)):
                fn = self.eval(node.fn, env)
                arg = self.eval(node.arg, env)
                self.spend(node.span)
                if isinstance(fn, VClosure):
                    inner = dict(fn.env)
                    inner[fn.param] = arg
                    node, env = fn.body, inner
                    continue
                if isinstance(fn, VOpaque) and fn.name in _BUILTINS and not fn.args:
                    result = _BUILTINS[fn.name][1](arg)
                    if result is None:
                        fail(E_STUCK, f"{fn.name} applied to {arg} (internal error)", node.span)
                    return result
                if isinstance(fn, VOpaque):
                    return VOpaque(fn.name, fn.args + (arg,))
                fail(E_STUCK, f"cannot apply {fn} (internal error)", node.span)
            if isinstance(node, ast.Conditional):
                guard = self.eval(node.guard, env)
                if not isinstance(guard, VBool):
                    fail(E_STUCK, f"conditional guard evaluated to non-Boolean {guard} (internal error)", node.span)
                self.spend(node.span)
                node = node.then_branch if guard.value else node.else_branch
                continue
            if isinstance(node, ast.LetExpr):
                self.spend(node.span)
                inner = dict(env)
                for name, _ in node.bindings:
                    inner[name] = _Placeholder()
                for name, rhs in node.bindings:
                    inner[name] = self.eval(rhs, inner)
                node, env = node.body, inner
                continue
            if isinstance(node, (ast.Quote, ast.Abstract)):
                node = node.inner
                continue
            if isinstance(node, ast.Relation) and node.op == "=":
                left = self.eval(node.left, env)
                right = self.eval(node.right, env)
                return VBool(left == right)
            fail(E_STUCK, f"{type(node).__name__} has no computational value (internal error)", node.span)


def _require_closed(ctx: TypingContext, node: ast.Node) -> None:
    free = sorted(
        name
        for name in ast.free_names(node)
        if name not in ctx.constants and name not in ctx.definitions and name not in _BUILTINS
    )
    if free:
        fail(E_FREE_VARIABLES, f"free variables in expression: {', '.join(free)}", node.span)


def evaluate(ctx: TypingContext, node: ast.Node, budget: EvalBudget = EvalBudget()) -> tuple[object, TypeExpr]:
    """Call-by-value evaluation of a closed, well-typed expression.

    Deterministic; a larger budget never changes a successful result.
    """
    _require_closed(ctx, node)
    inf = Inferencer(ctx)
    type_ = inf.solved(inf.infer(node, "expr"))
    value = Evaluator(ctx, budget).eval(node, {})
    return value, type_


def abstract_term(ctx: TypingContext, node: ast.Node, budget: EvalBudget = EvalBudget()) -> object:
    """The value of a closed, typed term (via its expression image)."""
    _require_closed(ctx, node)
    inf = Inferencer(ctx)
    inf.infer(node, "expr")
    return Evaluator(ctx, budget).eval(node, {})
