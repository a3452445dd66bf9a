"""Natural-deduction derivation checking.

Fitch-style scripts: `assume` opens a hypothesis box (by indentation),
`obtain` introduces an existential witness scoped to the end of its box, and
box-consuming rules (implies_intro, contradiction_intro, cases, forall_intro)
discharge a closed box.  Matching is first-order alpha-equivalence; every rule
instance is syntactically determined by the step's formula and premises.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .abstraction import PropositionNode, abstract_sentence, proposition_from
from .diagnostics import (
    E_DANGLING_REF,
    E_FRESHNESS,
    E_GOAL_MISMATCH,
    E_RULE_MISMATCH,
    E_SYNTAX,
    NO_SPAN,
    Span,
    fail,
)
from .parser import ProofDecl, StepLine, parse_formula
from .render import render
from .theories import TheoryEnv
from .typecheck import Inferencer, TypingContext
from .types import TypeExpr

RULE_NAMES = frozenset(
    {
        "implies_intro", "implies_elim",
        "and_intro", "and_elim_left", "and_elim_right",
        "or_intro_left", "or_intro_right", "or_elim_ds", "cases",
        "contradiction_intro", "dneg_elim",
        "soundness", "adequacy_intro", "adequacy_elim",
        "forall_intro", "forall_elim", "exists_intro", "exists_elim",
        "iff_intro", "iff_elim_lr", "iff_elim_rl",
        "eq_refl", "eq_subst",
        "unfold_def", "axiom", "theorem_ref",
    }
)


@dataclass
class _Box:
    number: int
    assume_indent: int
    parent_path: tuple[int, ...]
    hyp: ast.Node  # normalized hypothesis tree
    last: ast.Node
    content_indent: int | None = None
    witnesses: dict = field(default_factory=dict)  # name -> TypeExpr
    eigen: tuple[str, TypeExpr] | None = None


@dataclass
class _ClosedBox:
    number: int
    parent_path: tuple[int, ...]
    hyp: ast.Node
    last: ast.Node
    eigen: tuple[str, TypeExpr] | None


@dataclass
class _StepRecord:
    number: int
    path: tuple[int, ...]
    tree: ast.Node
    node: ast.Node


@dataclass(frozen=True)
class Verified:
    """Outcome of a successful derivation check."""

    name: str
    goal: PropositionNode
    steps_checked: int


def _norm(node: ast.Node) -> ast.Node:
    return ast.alpha_normalize(node)


def _subst_norm(tree: ast.Node, mapping: dict[str, ast.Node]) -> ast.Node:
    return _norm(ast.substitute(tree, mapping))


def _instantiate_binder(binder: ast.Node, replacement: ast.Node) -> ast.Node:
    """Body of a normalized Forall/Exists with its variable replaced."""
    return _subst_norm(binder.body, {binder.var: replacement})


# --- functional rule application -------------------------------------------------


def apply_rule(name: str, premises: list, payload=None):
    """Compute a rule schema's conclusion from premise propositions.

    Premises and result are PropositionNode; payload carries the instantiation
    data the schema cannot recover from its premises (a witness term, the other
    disjunct, a definition).  E030 when the premises do not fit the schema.
    """
    trees = [p.tree if isinstance(p, PropositionNode) else _norm(p) for p in premises]
    payload_tree = None
    if isinstance(payload, PropositionNode):
        payload_tree = payload.tree
    elif isinstance(payload, ast.Node):
        payload_tree = _norm(payload)
    result = _apply_rule_tree(name, trees, payload_tree)
    return PropositionNode(result)


def _schema_fail(name: str, detail: str, span: Span = NO_SPAN):
    fail(E_RULE_MISMATCH, f"rule {name}: {detail}", span)


def _apply_rule_tree(name: str, trees: list[ast.Node], payload: ast.Node | None) -> ast.Node:
    def arity(n: int) -> None:
        if len(trees) != n:
            _schema_fail(name, f"takes {n} premise(s), got {len(trees)}")

    if name == "implies_intro":
        arity(1)
        t = trees[0]
        if not (isinstance(t, ast.Turnstile) and len(t.antecedents) == 1 and len(t.consequents) == 1):
            _schema_fail(name, f"premise must have shape (H |- C), got {render(t)}")
        return _norm(ast.Implies(t.antecedents[0], t.consequents[0]))
    if name == "implies_elim":
        arity(2)
        for imp, other in ((trees[0], trees[1]), (trees[1], trees[0])):
            if isinstance(imp, ast.Implies) and imp.left == other:
                return imp.right
        _schema_fail(name, f"premises {render(trees[0])} and {render(trees[1])} do not match P, P => Q")
    if name == "and_intro":
        arity(2)
        return ast.And(trees[0], trees[1])
    if name == "and_elim_left":
        arity(1)
        if not isinstance(trees[0], ast.And):
            _schema_fail(name, f"premise must have shape P /\\ Q, got {render(trees[0])}")
        return trees[0].left
    if name == "and_elim_right":
        arity(1)
        if not isinstance(trees[0], ast.And):
            _schema_fail(name, f"premise must have shape P /\\ Q, got {render(trees[0])}")
        return trees[0].right
    if name == "or_intro_left":
        arity(1)
        if payload is None:
            _schema_fail(name, "needs the other disjunct")
        return ast.Or(trees[0], payload)
    if name == "or_intro_right":
        arity(1)
        if payload is None:
            _schema_fail(name, "needs the other disjunct")
        return ast.Or(payload, trees[0])
    if name == "or_elim_ds":
        arity(2)
        for neg, disj in ((trees[0], trees[1]), (trees[1], trees[0])):
            if isinstance(neg, ast.Not) and isinstance(disj, ast.Or) and disj.left == neg.child:
                return disj.right
        _schema_fail(name, f"premises {render(trees[0])} and {render(trees[1])} do not match not P, P \\/ Q")
    if name == "cases":
        arity(3)
        disj, left_box, right_box = trees
        if not isinstance(disj, ast.Or):
            _schema_fail(name, f"first premise must be a disjunction, got {render(disj)}")
        for t, hyp in ((left_box, disj.left), (right_box, disj.right)):
            if not (isinstance(t, ast.Turnstile) and len(t.antecedents) == 1 and len(t.consequents) == 1):
                _schema_fail(name, f"case premise must have shape (H |- C), got {render(t)}")
            if t.antecedents[0] != hyp:
                _schema_fail(name, f"case hypothesis {render(t.antecedents[0])} does not match disjunct {render(hyp)}")
        if left_box.consequents[0] != right_box.consequents[0]:
            _schema_fail(name, "the two cases conclude different formulas")
        return left_box.consequents[0]
    if name == "contradiction_intro":
        arity(1)
        t = trees[0]
        if not (isinstance(t, ast.Turnstile) and len(t.antecedents) == 1 and len(t.consequents) == 1):
            _schema_fail(name, f"premise must have shape (H |- C /\\ not C), got {render(t)}")
        body = t.consequents[0]
        if not _is_contradiction_pair(body):
            _schema_fail(name, f"box must conclude a contradiction pair, got {render(body)}")
        return ast.Not(t.antecedents[0])
    if name == "dneg_elim":
        arity(1)
        t = trees[0]
        if not (isinstance(t, ast.Not) and isinstance(t.child, ast.Not)):
            _schema_fail(name, f"premise must have shape not not P, got {render(t)}")
        return t.child.child
    if name == "soundness":
        arity(1)
        t = trees[0]
        if not (isinstance(t, ast.Turnstile) and not t.antecedents and len(t.consequents) == 1):
            _schema_fail(name, f"premise must have shape (|- P), got {render(t)}")
        return t.consequents[0]
    if name == "adequacy_elim":
        arity(1)
        t = trees[0]
        if not (
            isinstance(t, ast.Turnstile)
            and not t.antecedents
            and len(t.consequents) == 1
            and isinstance(t.consequents[0], ast.Turnstile)
        ):
            _schema_fail(name, f"premise must have shape (|- (G |- P)), got {render(t)}")
        return t.consequents[0]
    if name == "adequacy_intro":
        arity(1)
        return ast.Turnstile((), (trees[0],))
    if name == "iff_intro":
        arity(2)
        a, b = trees
        if not (isinstance(a, ast.Implies) and isinstance(b, ast.Implies)):
            _schema_fail(name, "premises must be the two implications")
        if a.left != b.right or a.right != b.left:
            _schema_fail(name, "the two implications do not mirror each other")
        return ast.Iff(a.left, a.right)
    if name == "iff_elim_lr":
        arity(2)
        for iff, other in ((trees[0], trees[1]), (trees[1], trees[0])):
            if isinstance(iff, ast.Iff) and iff.left == other:
                return iff.right
        _schema_fail(name, "premises do not match P <=> Q, P")
    if name == "iff_elim_rl":
        arity(2)
        for iff, other in ((trees[0], trees[1]), (trees[1], trees[0])):
            if isinstance(iff, ast.Iff) and iff.right == other:
                return iff.left
        _schema_fail(name, "premises do not match P <=> Q, Q")
    if name == "forall_elim":
        arity(1)
        t = trees[0]
        if not isinstance(t, ast.Forall):
            _schema_fail(name, f"premise must be universally quantified, got {render(t)}")
        if payload is None:
            _schema_fail(name, "needs a witness term payload")
        return _instantiate_binder(t, payload)
    if name == "eq_refl":
        arity(0)
        if payload is None:
            _schema_fail(name, "needs a term payload")
        return ast.Relation("=", payload, payload)
    _schema_fail(name, "not a functional schema (checked against the derivation context)")


def _is_contradiction_pair(body: ast.Node) -> bool:
    if not isinstance(body, ast.And):
        return False
    left, right = body.left, body.right
    return (isinstance(right, ast.Not) and right.child == left) or (
        isinstance(left, ast.Not) and left.child == right
    )


def propositional_schemas() -> dict:
    """The nine propositional schemas as (premises, conclusion) instances over
    atoms P, Q, R, for exhaustive two-valued validation."""
    schemas = {
        "implies_intro": [(["(P |- Q)"], "P => Q")],
        "implies_elim": [(["P", "P => Q"], "Q")],
        "and_intro": [(["P", "Q"], "P /\\ Q")],
        "and_elim": [(["P /\\ Q"], "P"), (["P /\\ Q"], "Q")],
        "or_intro": [(["P"], "P \\/ Q"), (["Q"], "P \\/ Q")],
        "or_elim_ds": [(["not P", "P \\/ Q"], "Q")],
        "cases": [(["P \\/ Q", "(P |- R)", "(Q |- R)"], "R")],
        "contradiction_intro": [(["(P |- Q /\\ not Q)"], "not P")],
        "dneg_elim": [(["not not P"], "P")],
    }
    return {
        name: [([parse_formula(p) for p in prems], parse_formula(concl)) for prems, concl in instances]
        for name, instances in schemas.items()
    }


# --- derivation checking ----------------------------------------------------------


class _DerivationChecker:
    def __init__(self, env: TheoryEnv, decl: ProofDecl):
        self.env = env
        self.decl = decl
        self.open_boxes: list[_Box] = []
        self.closed_boxes: dict[int, _ClosedBox] = {}
        self.steps: dict[int, _StepRecord] = {}
        self.top_witnesses: dict[str, TypeExpr] = {}
        self.top_last: ast.Node | None = None
        self.dead_names: set[str] = set()
        self.base_indent: int | None = None
        self.goal: PropositionNode | None = None

    # -- context plumbing --

    def current_path(self) -> tuple[int, ...]:
        return tuple(b.number for b in self.open_boxes)

    def local_constants(self) -> dict:
        consts = dict(self.top_witnesses)
        for b in self.open_boxes:
            consts.update(b.witnesses)
            if b.eigen:
                consts[b.eigen[0]] = b.eigen[1]
        return consts

    def typing_context(self) -> TypingContext:
        base = self.env.typing_context()
        merged = dict(base.constants)
        merged.update(self.local_constants())
        return TypingContext(
            constants=merged,
            definitions=base.definitions,
            type_names=base.type_names,
            type_abbrevs=base.type_abbrevs,
        )

    def abstract(self, formula: ast.Node, step: StepLine) -> ast.Node:
        dead = ast.free_names(formula) & self.dead_names
        if dead:
            fail(
                E_FRESHNESS,
                f"step {step.number}: witness {sorted(dead)[0]} is no longer in scope",
                step.span,
            )
        return abstract_sentence(self.typing_context(), formula, theory=self.env.name).tree

    def used_names(self) -> set[str]:
        names = set(self.env.constants) | set(self.env.definitions) | self.dead_names
        names |= set(self.top_witnesses)
        for b in self.open_boxes:
            names |= set(b.witnesses)
            if b.eigen:
                names.add(b.eigen[0])
        for rec in self.steps.values():
            names |= ast.free_names(rec.node)
        names |= ast.free_names(self.decl.goal)
        return names

    # -- main loop --

    def run(self) -> Verified:
        self.goal = abstract_sentence(self.env.typing_context(), self.decl.goal, theory=self.env.name)
        last_number = 0
        for step in self.decl.steps:
            if step.number <= last_number:
                fail(E_SYNTAX, f"step numbers must be strictly increasing at step {step.number}", step.span)
            last_number = step.number
            self.close_boxes_for(step)
            self.place_indent(step)
            self.check_step(step)
        if self.open_boxes:
            b = self.open_boxes[-1]
            fail(E_RULE_MISMATCH, f"hypothesis of step {b.number} is never discharged", self.decl.steps[-1].span)
        if self.top_last is None or self.top_last != self.goal.tree:
            got = render(self.top_last) if self.top_last is not None else "nothing"
            fail(
                E_GOAL_MISMATCH,
                f"proof {self.decl.name} concludes {got}, goal is {render(self.goal.tree)}",
                self.decl.steps[-1].span,
            )
        return Verified(self.decl.name, self.goal, len(self.decl.steps))

    def close_boxes_for(self, step: StepLine) -> None:
        while self.open_boxes and step.indent <= self.open_boxes[-1].assume_indent:
            box = self.open_boxes.pop()
            self.closed_boxes[box.number] = _ClosedBox(box.number, box.parent_path, box.hyp, box.last, box.eigen)
            self.dead_names |= set(box.witnesses)
            if box.eigen:
                self.dead_names.add(box.eigen[0])

    def place_indent(self, step: StepLine) -> None:
        if self.open_boxes:
            box = self.open_boxes[-1]
            if box.content_indent is None:
                box.content_indent = step.indent
            elif step.indent != box.content_indent:
                fail(E_SYNTAX, f"step {step.number}: inconsistent indentation", step.span)
        else:
            if self.base_indent is None:
                self.base_indent = step.indent
            elif step.indent != self.base_indent:
                fail(E_SYNTAX, f"step {step.number}: inconsistent indentation", step.span)

    def record(self, step: StepLine, tree: ast.Node) -> None:
        self.steps[step.number] = _StepRecord(step.number, self.current_path(), tree, step.formula)
        if self.open_boxes:
            self.open_boxes[-1].last = tree
        else:
            self.top_last = tree

    # -- premise resolution --

    def resolve_formula(self, ref: int, step: StepLine) -> ast.Node:
        rec = self.steps.get(ref)
        here = self.current_path()
        if rec is None or ref >= step.number:
            fail(E_DANGLING_REF, f"step {step.number}: no earlier step {ref} to cite", step.span)
        if ref in self.closed_boxes:
            fail(
                E_DANGLING_REF,
                f"step {step.number}: step {ref} is a discharged hypothesis; cite the box through its rule",
                step.span,
            )
        if ref in here:
            return rec.tree  # an open hypothesis enclosing this step
        if rec.path == here[: len(rec.path)]:
            return rec.tree  # same or enclosing level, all boxes on the path still open
        fail(E_DANGLING_REF, f"step {step.number}: step {ref} is not visible here", step.span)

    def resolve_box(self, ref: int, step: StepLine) -> _ClosedBox:
        box = self.closed_boxes.get(ref)
        if box is None or box.parent_path != self.current_path():
            fail(E_DANGLING_REF, f"step {step.number}: step {ref} is not a discharged hypothesis box here", step.span)
        return box

    # -- step checking --

    def check_step(self, step: StepLine) -> None:
        if step.kind == "assume":
            self.check_assume(step)
            return
        if step.rule is None or step.rule not in RULE_NAMES:
            fail(E_RULE_MISMATCH, f"step {step.number}: unknown rule {step.rule!r}", step.span)
        if step.kind == "obtain" or step.rule == "exists_elim":
            self.check_obtain(step)
            return
        handler = getattr(self, f"rule_{step.rule}", None)
        if handler is not None:
            tree = handler(step)
        else:
            tree = self.check_schema_rule(step)
        expected = self.abstract(step.formula, step)
        if tree != expected:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: rule {step.rule} yields {render(tree)}, not {render(expected)}",
                step.span,
            )
        self.record(step, expected)

    def check_assume(self, step: StepLine) -> None:
        eigen = None
        formula = step.formula
        if isinstance(formula, ast.TypeJudgment) and isinstance(formula.term, (ast.Var, ast.ConstRef)):
            name = formula.term.name
            if name in self.used_names():
                fail(E_FRESHNESS, f"step {step.number}: eigenvariable {name} is not fresh", step.span)
            inf = Inferencer(self.typing_context())
            eigen = (name, inf.resolve_type(formula.type_, step.span))
        box = _Box(
            number=step.number,
            assume_indent=step.indent,
            parent_path=self.current_path(),
            hyp=ast.BoolLit(True),  # placeholder until abstracted below
            last=ast.BoolLit(True),
        )
        if eigen:
            box.eigen = eigen
        self.open_boxes.append(box)
        tree = self.abstract(formula, step)
        box.hyp = tree
        box.last = tree
        self.steps[step.number] = _StepRecord(step.number, box.parent_path, tree, formula)

    def check_obtain(self, step: StepLine) -> None:
        if step.rule != "exists_elim":
            fail(E_RULE_MISMATCH, f"step {step.number}: obtain steps use exists_elim", step.span)
        if len(step.refs) != 1:
            fail(E_RULE_MISMATCH, f"step {step.number}: exists_elim cites exactly one premise", step.span)
        if not step.payload_name:
            fail(E_RULE_MISMATCH, f"step {step.number}: exists_elim needs `with <witness>`", step.span)
        premise = self.resolve_formula(step.refs[0], step)
        if not isinstance(premise, ast.Exists):
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: exists_elim premise must be existential, got {render(premise)}",
                step.span,
            )
        witness = step.payload_name
        if witness in self.used_names():
            fail(E_FRESHNESS, f"step {step.number}: witness {witness} is not fresh", step.span)
        if ast.occurs_name(self.decl.goal, witness):
            fail(E_FRESHNESS, f"step {step.number}: witness {witness} occurs in the goal", step.span)
        if self.open_boxes:
            self.open_boxes[-1].witnesses[witness] = premise.var_type
        else:
            self.top_witnesses[witness] = premise.var_type
        expected = _instantiate_binder(premise, ast.ConstRef(witness))
        tree = self.abstract(step.formula, step)
        if tree != expected:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: exists_elim yields {render(expected)}, not {render(tree)}",
                step.span,
            )
        self.record(step, tree)

    # -- rules needing derivation context --

    def rule_implies_intro(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 1:
            fail(E_RULE_MISMATCH, f"step {step.number}: implies_intro cites its hypothesis step", step.span)
        box = self.resolve_box(step.refs[0], step)
        return _norm(ast.Implies(box.hyp, box.last))

    def rule_forall_intro(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 1:
            fail(E_RULE_MISMATCH, f"step {step.number}: forall_intro cites its eigenvariable box", step.span)
        box = self.resolve_box(step.refs[0], step)
        if box.eigen is None:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: forall_intro needs a box assuming `w : T`",
                step.span,
            )
        name, var_type = box.eigen
        target = self.abstract(step.formula, step)
        if not isinstance(target, ast.Forall) or target.var_type != var_type:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: forall_intro concludes a universal over {var_type}",
                step.span,
            )
        if _instantiate_binder(target, ast.ConstRef(name)) != box.last:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: box concludes {render(box.last)}, which is not the instance at {name}",
                step.span,
            )
        return target

    def rule_contradiction_intro(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 2:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: contradiction_intro cites the hypothesis and the contradiction",
                step.span,
            )
        href, cref = step.refs
        box = self.resolve_box(href, step)
        crec = self.steps.get(cref)
        if crec is None or crec.path != box.parent_path + (href,) or cref <= href:
            fail(
                E_DANGLING_REF,
                f"step {step.number}: step {cref} is not inside the hypothesis box of step {href}",
                step.span,
            )
        if not _is_contradiction_pair(crec.tree):
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: {render(crec.tree)} is not a contradiction pair",
                step.span,
            )
        target = self.abstract(step.formula, step)
        if target == _norm(ast.Not(box.hyp)):
            return target
        if isinstance(box.hyp, ast.Not) and target == box.hyp.child:
            return target  # classical form: hypothesis not G, conclusion G
        fail(
            E_RULE_MISMATCH,
            f"step {step.number}: contradiction_intro concludes {render(ast.Not(box.hyp))}"
            f" (or the hypothesis without its negation), not {render(target)}",
            step.span,
        )

    def rule_cases(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 3:
            fail(E_RULE_MISMATCH, f"step {step.number}: cases cites the disjunction and two case boxes", step.span)
        disj = self.resolve_formula(step.refs[0], step)
        left_box = self.resolve_box(step.refs[1], step)
        right_box = self.resolve_box(step.refs[2], step)
        return _apply_rule_tree(
            "cases",
            [
                disj,
                ast.Turnstile((left_box.hyp,), (left_box.last,)),
                ast.Turnstile((right_box.hyp,), (right_box.last,)),
            ],
            None,
        )

    def rule_adequacy_intro(self, step: StepLine) -> ast.Node:
        if step.payload_name:
            prop = self.env.theorems.get(step.payload_name) or self.env.axioms.get(step.payload_name)
            if prop is None:
                fail(
                    E_DANGLING_REF,
                    f"step {step.number}: no registered theorem or axiom named {step.payload_name}",
                    step.span,
                )
            return _norm(ast.Turnstile((), (prop.tree,)))
        if len(step.refs) != 1:
            fail(E_RULE_MISMATCH, f"step {step.number}: adequacy_intro cites one top-level step", step.span)
        rec = self.steps.get(step.refs[0])
        if rec is None:
            fail(E_DANGLING_REF, f"step {step.number}: no step {step.refs[0]} to cite", step.span)
        if rec.path != () or step.refs[0] in self.closed_boxes:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: adequacy_intro needs a hypothesis-free step, and step {rec.number} is not",
                step.span,
            )
        return _norm(ast.Turnstile((), (rec.tree,)))

    def rule_forall_elim(self, step: StepLine) -> ast.Node:
        premise = self._single_premise(step)
        if not isinstance(premise, ast.Forall):
            fail(E_RULE_MISMATCH, f"step {step.number}: forall_elim premise must be universal", step.span)
        term = self._payload_term(step, premise.var_type)
        return _instantiate_binder(premise, term)

    def rule_exists_intro(self, step: StepLine) -> ast.Node:
        premise = self._single_premise(step)
        target = self.abstract(step.formula, step)
        if not isinstance(target, ast.Exists):
            fail(E_RULE_MISMATCH, f"step {step.number}: exists_intro concludes an existential", step.span)
        term = self._payload_term(step, target.var_type)
        if _instantiate_binder(target, term) != premise:
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: premise {render(premise)} is not the {render(term)} instance of the conclusion",
                step.span,
            )
        return target

    def rule_eq_refl(self, step: StepLine) -> ast.Node:
        if step.refs:
            fail(E_RULE_MISMATCH, f"step {step.number}: eq_refl takes no premises", step.span)
        if step.payload_node is None:
            fail(E_RULE_MISMATCH, f"step {step.number}: eq_refl needs `with <term>`", step.span)
        inf = Inferencer(self.typing_context())
        inf.infer(step.payload_node, "term")
        return _norm(ast.Relation("=", step.payload_node, step.payload_node))

    def rule_eq_subst(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 2:
            fail(E_RULE_MISMATCH, f"step {step.number}: eq_subst cites the equation and the formula", step.span)
        eq = self.resolve_formula(step.refs[0], step)
        source = self.resolve_formula(step.refs[1], step)
        if not (isinstance(eq, ast.Relation) and eq.op == "="):
            fail(E_RULE_MISMATCH, f"step {step.number}: first premise must be an equation", step.span)
        target = self.abstract(step.formula, step)
        if not _rewrites_to(source, target, eq.left, eq.right):
            fail(
                E_RULE_MISMATCH,
                f"step {step.number}: {render(target)} is not {render(source)} with"
                f" {render(eq.left)} replaced by {render(eq.right)}",
                step.span,
            )
        return target

    def rule_unfold_def(self, step: StepLine) -> ast.Node:
        premise = self._single_premise(step)
        if not step.payload_name or step.payload_name not in self.env.definitions:
            fail(E_RULE_MISMATCH, f"step {step.number}: unfold_def needs `with <definition name>`", step.span)
        defn = self.env.definitions[step.payload_name]
        target = self.abstract(step.formula, step)
        unfolded_premise = ast.dneg_normalize(_norm(_rewrite_definition(premise, defn)))
        unfolded_target = ast.dneg_normalize(_norm(_rewrite_definition(target, defn)))
        n_premise = ast.dneg_normalize(premise)
        n_target = ast.dneg_normalize(target)
        if unfolded_premise == n_target or unfolded_target == n_premise or unfolded_premise == unfolded_target:
            return target
        fail(
            E_RULE_MISMATCH,
            f"step {step.number}: {render(target)} is not {render(premise)} with {defn.name} unfolded",
            step.span,
        )

    def rule_axiom(self, step: StepLine) -> ast.Node:
        target = self.abstract(step.formula, step)
        if step.payload_name:
            prop = self.env.axioms.get(step.payload_name)
            if prop is None:
                fail(E_DANGLING_REF, f"step {step.number}: no axiom named {step.payload_name}", step.span)
            if prop.tree != target:
                fail(
                    E_RULE_MISMATCH,
                    f"step {step.number}: axiom {step.payload_name} states {render(prop.tree)}",
                    step.span,
                )
            return target
        if any(prop.tree == target for prop in self.env.axioms.values()):
            return target
        fail(E_RULE_MISMATCH, f"step {step.number}: {render(target)} is not an axiom of {self.env.name}", step.span)

    def rule_theorem_ref(self, step: StepLine) -> ast.Node:
        target = self.abstract(step.formula, step)
        if step.payload_name:
            prop = self.env.theorems.get(step.payload_name)
            if prop is None:
                fail(E_DANGLING_REF, f"step {step.number}: no theorem named {step.payload_name}", step.span)
            if prop.tree != target:
                fail(
                    E_RULE_MISMATCH,
                    f"step {step.number}: theorem {step.payload_name} states {render(prop.tree)}",
                    step.span,
                )
            return target
        if any(prop.tree == target for prop in self.env.theorems.values()):
            return target
        fail(E_RULE_MISMATCH, f"step {step.number}: {render(target)} is not a registered theorem", step.span)

    # -- plain schema rules --

    def check_schema_rule(self, step: StepLine) -> ast.Node:
        premises = [self.resolve_formula(r, step) for r in step.refs]
        payload = None
        if step.rule in ("or_intro_left", "or_intro_right"):
            target = self.abstract(step.formula, step)
            if not isinstance(target, ast.Or):
                fail(E_RULE_MISMATCH, f"step {step.number}: or-introduction concludes a disjunction", step.span)
            payload = target.right if step.rule == "or_intro_left" else target.left
        return _apply_rule_tree(step.rule, premises, payload)

    # -- helpers --

    def _single_premise(self, step: StepLine) -> ast.Node:
        if len(step.refs) != 1:
            fail(E_RULE_MISMATCH, f"step {step.number}: rule {step.rule} cites exactly one premise", step.span)
        return self.resolve_formula(step.refs[0], step)

    def _payload_term(self, step: StepLine, expected_type: TypeExpr) -> ast.Node:
        if step.payload_node is None:
            fail(E_RULE_MISMATCH, f"step {step.number}: rule {step.rule} needs `with <term>`", step.span)
        inf = Inferencer(self.typing_context())
        term_type = inf.infer(step.payload_node, "term")
        inf.unify_at(term_type, expected_type, step.span)
        inf.require_solved(step.span)
        return _norm(step.payload_node)


def _rewrites_to(source: ast.Node, target: ast.Node, a: ast.Node, b: ast.Node) -> bool:
    """target is source with some occurrences of a replaced by b."""
    if source == target:
        return True
    if source == a and target == b:
        return True
    if type(source) is not type(target):
        return False
    sk, tk = ast.child_nodes(source), ast.child_nodes(target)
    if len(sk) != len(tk):
        return False
    for f in ("name", "value", "op", "var", "var_type", "type_"):
        if getattr(source, f, None) != getattr(target, f, None):
            return False
    return all(_rewrites_to(s, t, a, b) for s, t in zip(sk, tk))


def _rewrite_definition(tree: ast.Node, defn) -> ast.Node:
    """Replace applications/references of a defined name by its definiens."""
    from .typecheck import flatten_args

    if isinstance(tree, ast.ConstRef) and tree.name == defn.name and not defn.params:
        return _norm(defn.body)
    if isinstance(tree, ast.Apply) and isinstance(tree.fn, ast.ConstRef) and tree.fn.name == defn.name and defn.params:
        args = flatten_args(tree.arg, len(defn.params))
        if args is not None:
            mapping = {pname: _rewrite_definition(arg, defn) for (pname, _), arg in zip(defn.params, args)}
            return _norm(ast.substitute(defn.body, mapping))
    from dataclasses import fields as dc_fields, replace as dc_replace

    updates = {}
    for f in dc_fields(tree):
        if f.name == "span":
            continue
        v = getattr(tree, f.name)
        if isinstance(v, ast.Node):
            updates[f.name] = _rewrite_definition(v, defn)
        elif isinstance(v, tuple) and v and all(isinstance(item, ast.Node) for item in v):
            updates[f.name] = tuple(_rewrite_definition(item, defn) for item in v)
        elif isinstance(v, tuple) and v and all(isinstance(item, tuple) for item in v):
            updates[f.name] = tuple((n, _rewrite_definition(rhs, defn)) for n, rhs in v)
    if not updates:
        return tree
    return dc_replace(tree, **updates)


def check_derivation(env: TheoryEnv, decl: ProofDecl) -> Verified:
    """Verify every step of a proof script against its rule schema."""
    return _DerivationChecker(env, decl).run()


def register_theorem(env: TheoryEnv, name: str, decl: ProofDecl) -> tuple[TheoryEnv, Verified]:
    """Check a derivation and record its goal as a citable theorem."""
    verified = check_derivation(env, decl)
    return env.with_theorem(name, verified.goal, decl.span), verified
