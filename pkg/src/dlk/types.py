"""Type expressions and first-order unification with an occurs check.

The occurs check is what makes self-application templates untypable: solving
``?h = Proc(?h, T)`` has no finite solution, so every fixed-point helper of the
shape ``[x: ?h] -> f.[x.[x]]`` is rejected rather than elaborated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import (
    E_OCCURS_CHECK,
    E_TYPE_MISMATCH,
    E_UNSOLVED_HOLE,
    NO_SPAN,
    Span,
    fail,
)

BASE_NAMES = ("Bool", "Nat", "String", "Sentence", "Proposition", "Proof", "Theory")


@dataclass(frozen=True)
class TypeExpr:
    pass


@dataclass(frozen=True)
class Base(TypeExpr):
    name: str  # one of BASE_NAMES

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Union(TypeExpr):
    left: TypeExpr
    right: TypeExpr

    def __str__(self) -> str:
        return f"Union({self.left}, {self.right})"


@dataclass(frozen=True)
class Pair(TypeExpr):
    first: TypeExpr
    second: TypeExpr

    def __str__(self) -> str:
        return f"Pair({self.first}, {self.second})"


@dataclass(frozen=True)
class Proc(TypeExpr):
    """Type of computable procedures from domain into codomain."""

    domain: TypeExpr
    codomain: TypeExpr

    def __str__(self) -> str:
        return f"Proc({self.domain}, {self.codomain})"


@dataclass(frozen=True)
class Fun(TypeExpr):
    """Type of mathematical functions from domain into codomain."""

    domain: TypeExpr
    codomain: TypeExpr

    def __str__(self) -> str:
        return f"Fun({self.domain}, {self.codomain})"


@dataclass(frozen=True)
class TermOf(TypeExpr):
    inner: TypeExpr

    def __str__(self) -> str:
        return f"Term({self.inner})"


@dataclass(frozen=True)
class Opaque(TypeExpr):
    """A named type constant registered by a theory pack (e.g. R, Set(Nat))."""

    name: str
    args: tuple[TypeExpr, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"{self.name}({', '.join(str(a) for a in self.args)})"
        return self.name


@dataclass(frozen=True)
class MetaVar(TypeExpr):
    """A solver hole; only legal while one declaration is being elaborated."""

    ident: int
    hint: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"?{self.hint or self.ident}"


BOOL = Base("Bool")
NAT = Base("Nat")
STRING = Base("String")
SENTENCE = Base("Sentence")
PROPOSITION = Base("Proposition")
PROOF = Base("Proof")
THEORY = Base("Theory")

BASE_TYPES = {name: Base(name) for name in BASE_NAMES}

# Substitution: MetaVar id -> TypeExpr.  Kept triangular; `apply` resolves fully,
# so apply(apply(t)) == apply(t).
Substitution = dict


def children(t: TypeExpr) -> tuple[TypeExpr, ...]:
    if isinstance(t, Union):
        return (t.left, t.right)
    if isinstance(t, Pair):
        return (t.first, t.second)
    if isinstance(t, (Proc, Fun)):
        return (t.domain, t.codomain)
    if isinstance(t, TermOf):
        return (t.inner,)
    if isinstance(t, Opaque):
        return t.args
    return ()


def rebuild(t: TypeExpr, kids: tuple[TypeExpr, ...]) -> TypeExpr:
    if isinstance(t, Union):
        return Union(*kids)
    if isinstance(t, Pair):
        return Pair(*kids)
    if isinstance(t, Proc):
        return Proc(*kids)
    if isinstance(t, Fun):
        return Fun(*kids)
    if isinstance(t, TermOf):
        return TermOf(*kids)
    if isinstance(t, Opaque):
        return Opaque(t.name, kids)
    return t


def resolve(t: TypeExpr, subst: Substitution) -> TypeExpr:
    """Chase top-level MetaVar bindings without rewriting the whole tree."""
    while isinstance(t, MetaVar) and t.ident in subst:
        t = subst[t.ident]
    return t


def apply_subst(t: TypeExpr, subst: Substitution) -> TypeExpr:
    """Fully substitute; the result contains only unbound MetaVars."""
    t = resolve(t, subst)
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, tuple(apply_subst(k, subst) for k in kids))


def occurs_in(ident: int, t: TypeExpr, subst: Substitution) -> bool:
    t = resolve(t, subst)
    if isinstance(t, MetaVar):
        return t.ident == ident
    return any(occurs_in(ident, k, subst) for k in children(t))


def contains_metavar(t: TypeExpr) -> bool:
    if isinstance(t, MetaVar):
        return True
    return any(contains_metavar(k) for k in children(t))


def metavars_in(t: TypeExpr) -> set[int]:
    if isinstance(t, MetaVar):
        return {t.ident}
    out: set[int] = set()
    for k in children(t):
        out |= metavars_in(k)
    return out


def wf_type(t: TypeExpr, known_opaque: frozenset[str] | None = None, span: Span = NO_SPAN) -> None:
    """Check that t is a fully solved type: no MetaVar leaks, opaque names known."""
    if isinstance(t, MetaVar):
        fail(E_UNSOLVED_HOLE, f"unsolved type hole {t}", span)
    if isinstance(t, Base) and t.name not in BASE_TYPES:
        fail(E_TYPE_MISMATCH, f"unknown base type {t.name}", span)
    if isinstance(t, Opaque) and known_opaque is not None and str(t) not in known_opaque:
        fail(E_TYPE_MISMATCH, f"unknown type {t}", span)
    for k in children(t):
        wf_type(k, known_opaque, span)


def unify(a: TypeExpr, b: TypeExpr, subst: Substitution, span: Span = NO_SPAN) -> Substitution:
    """Return the most general extension of subst making a and b equal.

    The input substitution is not mutated.  Raises DiagnosticError with E020 on
    a constructor clash and E021 when binding would create a cyclic type.
    """
    out = dict(subst)
    _unify(a, b, out, span)
    return out


def _unify(a: TypeExpr, b: TypeExpr, subst: Substitution, span: Span) -> None:
    a = resolve(a, subst)
    b = resolve(b, subst)
    if isinstance(a, MetaVar) and isinstance(b, MetaVar) and a.ident == b.ident:
        return
    if isinstance(a, MetaVar):
        _bind(a, b, subst, span)
        return
    if isinstance(b, MetaVar):
        _bind(b, a, subst, span)
        return
    if type(a) is not type(b):
        fail(E_TYPE_MISMATCH, f"type mismatch: expected {apply_subst(a, subst)}, got {apply_subst(b, subst)}", span)
    if isinstance(a, Base):
        if a.name != b.name:
            fail(E_TYPE_MISMATCH, f"type mismatch: expected {a}, got {b}", span)
        return
    if isinstance(a, Opaque):
        if a.name != b.name or len(a.args) != len(b.args):
            fail(E_TYPE_MISMATCH, f"type mismatch: expected {a}, got {b}", span)
    for ka, kb in zip(children(a), children(b)):
        _unify(ka, kb, subst, span)


def _bind(var: MetaVar, t: TypeExpr, subst: Substitution, span: Span) -> None:
    if occurs_in(var.ident, t, subst):
        fail(
            E_OCCURS_CHECK,
            f"no type satisfies {var} = {apply_subst(t, subst)}: "
            f"the hole would have to contain itself",
            span,
        )
    subst[var.ident] = t


class MetaVarFactory:
    """Per-declaration source of fresh solver holes."""

    def __init__(self) -> None:
        self._next = 0

    def fresh(self, hint: str = "") -> MetaVar:
        mv = MetaVar(self._next, hint)
        self._next += 1
        return mv
