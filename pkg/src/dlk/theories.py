"""Built-in axiomatized theories and the theory environment.

Every shipped axiom is stored as surface text and goes through the full
parse -> check -> abstract pipeline at load time, so a malformed pack cannot
load at all.  TheoryEnv values are immutable; updates return new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import ast
from .abstraction import PropositionNode, abstract_sentence
from .diagnostics import E_DUPLICATE_NAME, E_SELF_REFERENCE, NO_SPAN, Span, fail
from .parser import parse_formula, parse_type
from .typecheck import Definition, Inferencer, TypingContext
from .types import TypeExpr


@dataclass(frozen=True)
class TheoryEnv:
    name: str = "Mathematics"
    constants: dict = field(default_factory=dict)        # name -> TypeExpr
    axioms: dict = field(default_factory=dict)           # name -> PropositionNode
    axiom_sources: dict = field(default_factory=dict)    # name -> surface text
    definitions: dict = field(default_factory=dict)      # name -> Definition
    theorems: dict = field(default_factory=dict)         # name -> PropositionNode (append-only)
    type_names: frozenset = frozenset()
    type_abbrevs: dict = field(default_factory=dict)
    packs: frozenset = frozenset()

    def typing_context(self) -> TypingContext:
        return TypingContext(
            constants=self.constants,
            definitions=self.definitions,
            type_names=self.type_names,
            type_abbrevs=self.type_abbrevs,
        )

    def with_constant(self, name: str, type_: TypeExpr, span: Span = NO_SPAN) -> "TheoryEnv":
        if name in self.constants or name in self.definitions:
            fail(E_DUPLICATE_NAME, f"duplicate name {name}", span)
        return replace(self, constants={**self.constants, name: type_})

    def with_axiom(self, name: str, prop: PropositionNode, source: str = "") -> "TheoryEnv":
        return replace(
            self,
            axioms={**self.axioms, name: prop},
            axiom_sources={**self.axiom_sources, name: source},
        )

    def with_theorem(self, name: str, prop: PropositionNode, span: Span = NO_SPAN) -> "TheoryEnv":
        if name in self.theorems:
            fail(E_DUPLICATE_NAME, f"duplicate theorem name {name}", span)
        return replace(self, theorems={**self.theorems, name: prop})


def add_definition(
    env: TheoryEnv,
    name: str,
    params: tuple[tuple[str, TypeExpr], ...],
    body: ast.Node,
    span: Span = NO_SPAN,
) -> TheoryEnv:
    """Check and install a non-recursive definition.

    Definitions may not mention themselves, directly or transitively (E035);
    recursion belongs to expressions, not to the definition mechanism.
    """
    if name in env.definitions or name in env.constants:
        fail(E_DUPLICATE_NAME, f"duplicate name {name}", span)
    mentioned = _mentioned_definitions(env, body, frozenset(p for p, _ in params))
    if name in mentioned:
        fail(E_SELF_REFERENCE, f"definition {name} refers to itself", span)

    inf = Inferencer(env.typing_context())
    resolved_params = []
    for pname, ptype in params:
        resolved = inf.resolve_type(ptype, span)
        resolved_params.append((pname, resolved))
        inf.ctx = inf.ctx.bind(pname, resolved)
    is_formula = ast.is_formula_shape(body)
    result_type = None
    if is_formula:
        inf.check_sentence(body)
    else:
        role = "expr" if _needs_expression_role(body) else "term"
        result_type = inf.solved(inf.infer(body, role))
    inf.require_solved(body.span if body.span else span)

    definition = Definition(name, tuple(resolved_params), body, is_formula, result_type)
    return replace(env, definitions={**env.definitions, name: definition})


def _needs_expression_role(body: ast.Node) -> bool:
    return any(isinstance(n, (ast.ProcApply, ast.LetExpr)) for n in ast.walk(body))


def _mentioned_definitions(env: TheoryEnv, body: ast.Node, params: frozenset[str]) -> set[str]:
    seen: set[str] = set()
    frontier = {n for n in ast.free_names(body) if n not in params}
    while frontier:
        ref = frontier.pop()
        if ref in seen:
            continue
        seen.add(ref)
        if ref in env.definitions:
            d = env.definitions[ref]
            inner_params = frozenset(p for p, _ in d.params)
            frontier |= {n for n in ast.free_names(d.body) if n not in inner_params}
    return seen


# --- packs ----------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomPack:
    pack_id: str
    requires: tuple[str, ...]
    type_names: tuple[str, ...]
    type_abbrevs: tuple[tuple[str, str], ...]         # name -> type text
    constants: tuple[tuple[str, str], ...]            # name -> type text
    definitions: tuple[tuple[str, str, str], ...]     # name, "p: T, q: U" or "", body text
    axioms: tuple[tuple[str, str], ...]               # name -> formula text


NAT_PACK = AxiomPack(
    pack_id="nat",
    requires=(),
    type_names=(),
    type_abbrevs=(),
    constants=(
        ("0", "Nat"),
        ("Successor", "Fun(Nat, Nat)"),
    ),
    definitions=(
        ("Inductive", "P: Fun(Nat, Bool)", "P[0] /\\ (forall [i: Nat] -> P[i] => P[Successor[i]])"),
    ),
    axioms=(
        ("ZeroType", "0 : Nat"),
        ("SuccessorType", "Successor : Fun(Nat, Nat)"),
        ("SuccessorNonzero", "forall [i: Nat] -> not (Successor[i] = 0)"),
        ("SuccessorInjective", "forall [i: Nat, j: Nat] -> (Successor[i] = Successor[j]) <=> (i = j)"),
        ("Induction", "forall [P: Fun(Nat, Bool)] -> Inductive[P] <=> (forall [i: Nat] -> P[i])"),
    ),
)

SETS_PACK = AxiomPack(
    pack_id="sets",
    requires=("nat",),
    type_names=("Set(Nat)", "Sets(Nat)"),
    type_abbrevs=(
        ("DomainNat", "Union(Nat, Sets(Nat))"),
        ("SetFunctionsOfOrder1", "Fun(Nat, Nat)"),
        ("SetFunctionsOfOrder2", "Fun(Union(Nat, Fun(Nat, Nat)), Union(Nat, Fun(Nat, Nat)))"),
        (
            "SetFunctionsOfOrder3",
            "Fun(Union(Nat, Fun(Union(Nat, Fun(Nat, Nat)), Union(Nat, Fun(Nat, Nat)))),"
            " Union(Nat, Fun(Union(Nat, Fun(Nat, Nat)), Union(Nat, Fun(Nat, Nat)))))",
        ),
    ),
    constants=(
        ("EmptySet", "Set(Nat)"),
        ("Singleton", "Fun(Nat, Set(Nat))"),
        ("UnionAll", "Fun(Sets(Nat), Sets(Nat))"),
        ("SetUnion", "Fun(Pair(Set(Nat), Set(Nat)), Set(Nat))"),
        ("SetIntersection", "Fun(Pair(Set(Nat), Set(Nat)), Set(Nat))"),
        ("Elementwise", "Fun(Fun(Nat, Nat), Fun(Set(Nat), Set(Nat)))"),
        ("Restrict", "Fun(Pair(Set(Nat), Fun(Nat, Bool)), Set(Nat))"),
    ),
    definitions=(
        (
            "CharacteristicFunction",
            "f: Fun(DomainNat, Bool), s: Sets(Nat)",
            "forall [e: DomainNat] -> (e in s) <=> (f[e] = True)",
        ),
    ),
    axioms=(
        ("EmptySetType", "{} : Set(Nat)"),
        ("SingletonType", "forall [x: Nat] -> {x} : Set(Nat)"),
        ("UnionAllType", "forall [s: Sets(Nat)] -> UnionAll[s] : Sets(Nat)"),
        ("EmptySetNoElements", "forall [x: Nat] -> not (x in {})"),
        ("ImageType", "forall [s: Set(Nat), f: Fun(Nat, Nat)] -> Elementwise[f][s] : Set(Nat)"),
        ("RestrictionType", "forall [s: Set(Nat), p: Fun(Nat, Bool)] -> Restrict[s, p] : Set(Nat)"),
        ("EmptySubset", "forall [s: Set(Nat)] -> {} subset s"),
        (
            "Extensionality",
            "forall [s1: Set(Nat), s2: Set(Nat)] -> (s1 = s2) <=> (forall [x: Nat] -> (x in s1) <=> (x in s2))",
        ),
        ("SingletonMembership", "forall [x: Nat, y: Nat] -> (x in {y}) <=> (x = y)"),
        (
            "SubsetLaw",
            "forall [s1: Set(Nat), s2: Set(Nat)] -> (s1 subset s2) <=> (forall [x: Nat] -> (x in s1) => (x in s2))",
        ),
        (
            "UnionMembership",
            "forall [x: Nat, s1: Set(Nat), s2: Set(Nat)] -> (x in SetUnion[s1, s2]) <=> ((x in s1) \\/ (x in s2))",
        ),
        (
            "IntersectionMembership",
            "forall [x: Nat, s1: Set(Nat), s2: Set(Nat)] -> (x in SetIntersection[s1, s2]) <=> ((x in s1) /\\ (x in s2))",
        ),
        (
            "UnionAllMembership",
            "forall [x: DomainNat, s: Sets(Nat)] -> (x in UnionAll[s]) <=>"
            " (exists [s1: Set(Nat)] -> (x in s1) /\\ (s1 in s))",
        ),
        (
            "ImageMembership",
            "forall [y: Nat, s: Set(Nat), f: Fun(Nat, Nat)] -> (y in Elementwise[f][s]) <=>"
            " (exists [x: Nat] -> (x in s) /\\ (f[x] = y))",
        ),
        (
            "RestrictionMembership",
            "forall [y: Nat, s: Set(Nat), p: Fun(Nat, Bool)] -> (y in Restrict[s, p]) <=> ((y in s) /\\ p[y])",
        ),
        (
            "CharacteristicFunctions",
            "forall [s: Sets(Nat)] -> exists [f: Fun(DomainNat, Bool)] -> CharacteristicFunction[f, s]",
        ),
    ),
)

REALS_PACK = AxiomPack(
    pack_id="reals",
    requires=(),
    type_names=("R", "Set(R)"),
    type_abbrevs=(),
    constants=(
        ("<=", "Fun(Pair(R, R), Bool)"),
        ("EmptySetR", "Set(R)"),
    ),
    definitions=(
        ("UpperBound", "b: R, S: Set(R)", "(b in S) /\\ (forall [x: R] -> (x in S) => x <= b)"),
        ("Bounded", "S: Set(R)", "exists [b: R] -> UpperBound[b, S]"),
        (
            "LeastUpperBound",
            "b: R, S: Set(R)",
            "UpperBound[b, S] /\\ (forall [x: R] -> (x in S) => (UpperBound[x, S] <=> x <= b))",
        ),
        ("HasLeastUpperBound", "S: Set(R)", "exists [b: R] -> LeastUpperBound[b, S]"),
    ),
    axioms=(
        ("EmptySetRType", "EmptySetR : Set(R)"),
        (
            "LeastUpperBoundProperty",
            "forall [S: Set(R)] -> (not (S = EmptySetR)) /\\ Bounded[S] <=> HasLeastUpperBound[S]",
        ),
    ),
)

PACKS = {p.pack_id: p for p in (NAT_PACK, SETS_PACK, REALS_PACK)}

CONSISTENT_DEFINITION = "not exists [P: Proposition] -> (|- (P /\\ not P))"


def _parse_params(text: str) -> tuple[tuple[str, TypeExpr], ...]:
    if not text:
        return ()
    out = []
    for chunk in _split_params(text):
        name, _, type_text = chunk.partition(":")
        out.append((name.strip(), parse_type(type_text.strip())))
    return tuple(out)


def _split_params(text: str) -> list[str]:
    # Split on commas not nested inside parentheses.
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def load_theory(pack_ids: "list[str] | tuple[str, ...]" = (), name: str = "Mathematics") -> TheoryEnv:
    """Build a TheoryEnv with the requested packs (plus their requirements).

    The base environment always carries the Consistent definition.  Loading is
    idempotent: the same pack list always yields an equal environment.
    """
    wanted: list[str] = []

    def want(pid: str) -> None:
        if pid not in PACKS:
            raise ValueError(f"unknown theory pack {pid!r} (available: {', '.join(sorted(PACKS))})")
        for req in PACKS[pid].requires:
            want(req)
        if pid not in wanted:
            wanted.append(pid)

    for pid in pack_ids:
        want(pid)

    env = TheoryEnv(name=name)
    for pid in wanted:
        env = _load_pack(env, PACKS[pid])
    env = add_definition(env, "Consistent", (), parse_formula(CONSISTENT_DEFINITION))
    return env


def _load_pack(env: TheoryEnv, pack: AxiomPack) -> TheoryEnv:
    env = replace(env, type_names=env.type_names | frozenset(pack.type_names), packs=env.packs | {pack.pack_id})
    abbrevs = dict(env.type_abbrevs)
    for abbrev_name, type_text in pack.type_abbrevs:
        abbrevs[abbrev_name] = Inferencer(replace(env, type_abbrevs=abbrevs).typing_context()).resolve_type(
            parse_type(type_text), NO_SPAN
        )
    env = replace(env, type_abbrevs=abbrevs)
    for const_name, type_text in pack.constants:
        resolved = Inferencer(env.typing_context()).resolve_type(parse_type(type_text), NO_SPAN)
        env = replace(env, constants={**env.constants, const_name: resolved})
    for def_name, params_text, body_text in pack.definitions:
        env = add_definition(env, def_name, _parse_params(params_text), parse_formula(body_text))
    for axiom_name, formula_text in pack.axioms:
        formula = parse_formula(formula_text)
        prop = abstract_sentence(env.typing_context(), formula, theory=env.name)
        env = env.with_axiom(axiom_name, prop, formula_text)
    return env
