"""Grammar trees for terms, expressions and sentences.

One node family covers all three roles; the checker decides which shapes are
legal where (a sentence connective never appears in term position, etc.).
Structural equality is name-exact; alpha-equivalence is a separate predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Iterator

from .diagnostics import NO_SPAN, Span
from .types import TypeExpr

RELATION_OPS = ("=", "in", "subset", "sqsubseteq", "sqsubset")

# Infix operator spellings that desugar to predicate application of an
# operator-named constant over a pair, e.g. `m > n` = `>`[(m, n)].
INFIX_PREDICATES = (">", "<", ">=", "<=")


@dataclass(frozen=True)
class Node:
    def with_span(self, span: Span) -> "Node":
        return replace(self, span=span)


def _span_field() -> Span:
    return NO_SPAN


# --- terms and expressions ---------------------------------------------------


@dataclass(frozen=True)
class Var(Node):
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ConstRef(Node):
    """Reference to a theory constant, definition, or proof-local witness."""

    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class NatLit(Node):
    value: int
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StrLit(Node):
    value: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Apply(Node):
    """Function application f[x]; in sentence position this is predicate application."""

    fn: Node
    arg: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ProcApply(Node):
    """Procedure application p.[x]; only legal in expressions."""

    fn: Node
    arg: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Lambda(Node):
    var: str
    var_type: TypeExpr
    body: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class PairTerm(Node):
    first: Node
    second: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Conditional(Node):
    """(guard ? a : b); branches may be terms or sentences, guard is Boolean."""

    guard: Node
    then_branch: Node
    else_branch: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class LetExpr(Node):
    """Simultaneous (possibly recursive) bindings; expression role only."""

    bindings: tuple[tuple[str, Node], ...]
    body: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Quote(Node):
    inner: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Abstract(Node):
    inner: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


# --- sentences ----------------------------------------------------------------


@dataclass(frozen=True)
class Not(Node):
    child: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class And(Node):
    left: Node
    right: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Or(Node):
    left: Node
    right: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Implies(Node):
    left: Node
    right: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Iff(Node):
    left: Node
    right: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Relation(Node):
    op: str  # one of RELATION_OPS
    left: Node
    right: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class TypeJudgment(Node):
    term: Node
    type_: TypeExpr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Forall(Node):
    var: str
    var_type: TypeExpr
    body: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Exists(Node):
    var: str
    var_type: TypeExpr
    body: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Turnstile(Node):
    antecedents: tuple[Node, ...]
    consequents: tuple[Node, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ProofTurnstile(Node):
    """Proof-annotated turnstile; representable but consumed by no rule."""

    proof: Node
    body: Node
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


CONNECTIVES = (Not, And, Or, Implies, Iff)
BINDERS = (Lambda, Forall, Exists)


# --- generic traversal ---------------------------------------------------------


def child_nodes(node: Node) -> tuple[Node, ...]:
    out = []
    for f in fields(node):
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if isinstance(v, Node):
            out.append(v)
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, Node):
                    out.append(item)
                elif isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], Node):
                    out.append(item[1])
    return tuple(out)


def walk(node: Node) -> Iterator[Node]:
    yield node
    for c in child_nodes(node):
        yield from walk(c)


def free_names(node: Node, bound: frozenset[str] = frozenset()) -> set[str]:
    """Names of Var/ConstRef leaves not captured by a binder or Let binding."""
    if isinstance(node, (Var, ConstRef)):
        return set() if node.name in bound else {node.name}
    if isinstance(node, BINDERS):
        return free_names(node.body, bound | {node.var})
    if isinstance(node, LetExpr):
        inner = bound | {name for name, _ in node.bindings}
        out = free_names(node.body, inner)
        for _, rhs in node.bindings:
            out |= free_names(rhs, inner)
        return out
    out: set[str] = set()
    for c in child_nodes(node):
        out |= free_names(c, bound)
    return out


def occurs_name(node: Node, name: str) -> bool:
    return name in free_names(node)


def _fresh_name(base: str, avoid: set[str]) -> str:
    i = 1
    candidate = f"{base}_{i}"
    while candidate in avoid:
        i += 1
        candidate = f"{base}_{i}"
    return candidate


def substitute(node: Node, mapping: dict[str, Node]) -> Node:
    """Capture-avoiding substitution of terms for free Var/ConstRef names."""
    if not mapping:
        return node
    if isinstance(node, (Var, ConstRef)):
        return mapping.get(node.name, node)
    if isinstance(node, BINDERS):
        live = {k: v for k, v in mapping.items() if k != node.var}
        if not live:
            return node
        captured = set()
        for v in live.values():
            captured |= free_names(v)
        var = node.var
        body = node.body
        if var in captured and any(occurs_name(body, k) for k in live):
            new_var = _fresh_name(var, captured | free_names(body) | set(live))
            body = substitute(body, {var: Var(new_var)})
            var = new_var
        return replace(node, var=var, body=substitute(body, live))
    if isinstance(node, LetExpr):
        names = {name for name, _ in node.bindings}
        live = {k: v for k, v in mapping.items() if k not in names}
        if not live:
            return node
        return LetExpr(
            tuple((name, substitute(rhs, live)) for name, rhs in node.bindings),
            substitute(node.body, live),
            node.span,
        )
    updates = {}
    for f in fields(node):
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if isinstance(v, Node):
            updates[f.name] = substitute(v, mapping)
        elif isinstance(v, tuple) and v and all(isinstance(item, Node) for item in v):
            updates[f.name] = tuple(substitute(item, mapping) for item in v)
    if not updates:
        return node
    return replace(node, **updates)


def alpha_equal(a: Node, b: Node, env_a: dict[str, int] | None = None, env_b: dict[str, int] | None = None, depth: int = 0) -> bool:
    """Structural equality modulo bound-variable names."""
    env_a = env_a or {}
    env_b = env_b or {}
    if type(a) is not type(b):
        return False
    if isinstance(a, (Var, ConstRef)):
        ia, ib = env_a.get(a.name), env_b.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, NatLit):
        return a.value == b.value
    if isinstance(a, StrLit):
        return a.value == b.value
    if isinstance(a, BoolLit):
        return a.value == b.value
    if isinstance(a, BINDERS):
        if a.var_type != b.var_type:
            return False
        ea = dict(env_a)
        eb = dict(env_b)
        ea[a.var] = depth
        eb[b.var] = depth
        return alpha_equal(a.body, b.body, ea, eb, depth + 1)
    if isinstance(a, LetExpr):
        if len(a.bindings) != len(b.bindings):
            return False
        ea = dict(env_a)
        eb = dict(env_b)
        for i, ((na, _), (nb, _)) in enumerate(zip(a.bindings, b.bindings)):
            ea[na] = depth + i
            eb[nb] = depth + i
        d = depth + len(a.bindings)
        for (_, ra), (_, rb) in zip(a.bindings, b.bindings):
            if not alpha_equal(ra, rb, ea, eb, d):
                return False
        return alpha_equal(a.body, b.body, ea, eb, d)
    if isinstance(a, Relation) and a.op != b.op:
        return False
    if isinstance(a, TypeJudgment) and a.type_ != b.type_:
        return False
    if isinstance(a, Turnstile):
        if len(a.antecedents) != len(b.antecedents) or len(a.consequents) != len(b.consequents):
            return False
    ca, cb = child_nodes(a), child_nodes(b)
    if len(ca) != len(cb):
        return False
    return all(alpha_equal(x, y, env_a, env_b, depth) for x, y in zip(ca, cb))


def alpha_normalize(node: Node, env: dict[str, str] | None = None, depth: int = 0) -> Node:
    """Rename bound variables to _b<depth>; compositional, so two trees are
    alpha-equivalent iff their normal forms are structurally equal."""
    env = env or {}
    if isinstance(node, (Var, ConstRef)):
        name = env.get(node.name)
        return replace(node, name=name) if name else node
    if isinstance(node, BINDERS):
        fresh = f"_b{depth}"
        inner = dict(env)
        inner[node.var] = fresh
        return replace(node, var=fresh, body=alpha_normalize(node.body, inner, depth + 1))
    if isinstance(node, LetExpr):
        inner = dict(env)
        new_names = []
        for i, (name, _) in enumerate(node.bindings):
            fresh = f"_b{depth + i}"
            inner[name] = fresh
            new_names.append(fresh)
        d = depth + len(node.bindings)
        return LetExpr(
            tuple((n, alpha_normalize(rhs, inner, d)) for n, (_, rhs) in zip(new_names, node.bindings)),
            alpha_normalize(node.body, inner, d),
            node.span,
        )
    updates = {}
    for f in fields(node):
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if isinstance(v, Node):
            updates[f.name] = alpha_normalize(v, env, depth)
        elif isinstance(v, tuple) and v and all(isinstance(item, Node) for item in v):
            updates[f.name] = tuple(alpha_normalize(item, env, depth) for item in v)
    if not updates:
        return node
    return replace(node, **updates)


def dneg_normalize(node: Node) -> Node:
    """Remove every not(not(...)) pair, recursively."""
    if isinstance(node, Not) and isinstance(node.child, Not):
        return dneg_normalize(node.child.child)
    updates = {}
    for f in fields(node):
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if isinstance(v, Node):
            updates[f.name] = dneg_normalize(v)
        elif isinstance(v, tuple) and v and all(isinstance(item, Node) for item in v):
            updates[f.name] = tuple(dneg_normalize(item) for item in v)
        elif isinstance(v, tuple) and v and all(isinstance(item, tuple) for item in v):
            updates[f.name] = tuple((n, dneg_normalize(rhs)) for n, rhs in v)
    if not updates:
        return node
    return replace(node, **updates)


FORMULA_TYPES = (Not, And, Or, Implies, Iff, Relation, TypeJudgment, Forall, Exists, Turnstile, ProofTurnstile)


def is_formula_shape(node: Node) -> bool:
    """True for nodes only legal in sentence position."""
    return isinstance(node, FORMULA_TYPES)
