"""Term/expression inference and the sentence judgment."""

import pytest

from dlk.diagnostics import DiagnosticError
from dlk.parser import parse_formula, parse_term, parse_type
from dlk.render import render_type
from dlk.theories import load_theory
from dlk.typecheck import check_sentence, infer_expression, infer_term
from dlk.types import BOOL, NAT, Fun, MetaVar, Pair, Proc


@pytest.fixture(scope="module")
def nat_ctx():
    return load_theory(["nat"]).typing_context()


def test_identity_lambda_is_a_function_term(nat_ctx):
    assert infer_term(nat_ctx, parse_term("[x: Nat] -> x")) == Fun(NAT, NAT)


def test_successor_application(nat_ctx):
    assert infer_term(nat_ctx, parse_term("Successor[0]")) == NAT


def test_lambda_as_expression_is_a_procedure(nat_ctx):
    assert infer_expression(nat_ctx, parse_term("[x: Nat] -> x")) == Proc(NAT, NAT)


def test_let_group(nat_ctx):
    assert infer_expression(nat_ctx, parse_term("Let {v := 0}, v")) == NAT


def test_recursive_let_is_fine_for_programs(nat_ctx):
    t = infer_expression(nat_ctx, parse_term("Let {loop := [x: Nat] -> loop.[x]}, loop"))
    assert isinstance(t, Proc)
    assert t.domain == NAT
    assert isinstance(t.codomain, MetaVar)  # never constrained; recursion is legal here


def test_curry_helper_template_has_no_type(nat_ctx):
    # [x: ?h] -> f[x[x]] forces ?h = Proc(?h, _) / Fun(?h, _): the occurs check fires.
    with pytest.raises(DiagnosticError) as exc:
        infer_expression(
            nat_ctx,
            parse_term("[f: Proc(Proposition, Proposition)] -> [x: ?h] -> f.[x.[x]]"),
        )
    assert exc.value.code == "E021"
    with pytest.raises(DiagnosticError) as exc2:
        infer_term(nat_ctx, parse_term("[f: Fun(Proposition, Proposition)] -> [x: ?h] -> f[x[x]]"))
    assert exc2.value.code == "E021"


def test_procedure_application_is_not_a_term(nat_ctx):
    with pytest.raises(DiagnosticError) as exc:
        infer_term(nat_ctx, parse_term("Let {f := [x: Nat] -> x}, f.[0]"))
    assert exc.value.code == "E020"  # Let itself is expression-only


def test_fun_and_proc_never_unify(nat_ctx):
    with pytest.raises(DiagnosticError) as exc:
        infer_expression(nat_ctx, parse_term("([f: Fun(Nat, Nat)] -> f)[[x: Nat] -> x]"))
    # the argument lambda elaborates as Proc in expression role
    assert exc.value.code == "E020"


def test_principality(nat_ctx):
    term = parse_term("[p: Fun(Nat, Bool)] -> (p[0] ? 0 : Successor[0])")
    first = infer_term(nat_ctx, term)
    second = infer_term(nat_ctx, term)
    assert first == second == Fun(Fun(NAT, BOOL), NAT)


def test_quantified_sentence_with_order_predicate():
    env = load_theory(["nat"]).with_constant(">", Fun(Pair(NAT, NAT), BOOL))
    check_sentence(env.typing_context(), parse_formula("forall [n: Nat] -> exists [m: Nat] -> m > n"))


def test_berry_condition_is_e023(nat_ctx):
    env = load_theory(["nat"]).with_constant("s", parse_type("String"))
    with pytest.raises(DiagnosticError) as exc:
        check_sentence(env.typing_context(), parse_formula("forall [x: Nat] -> abstract(s)[x]"))
    assert exc.value.code == "E023"


def test_contradictory_but_well_formed(nat_ctx):
    env = load_theory([]).with_constant("P", parse_type("Proposition"))
    check_sentence(env.typing_context(), parse_formula("P /\\ not P"))


def test_unknown_identifier(nat_ctx):
    with pytest.raises(DiagnosticError) as exc:
        infer_term(nat_ctx, parse_term("NoSuchThing"))
    assert exc.value.code == "E010"


def test_unsolved_hole_in_constant_declaration_is_e022():
    from dlk.checker import check_source

    result = check_source("constant f : Fun(?a, ?a)")
    assert not result.ok
    assert result.diagnostics[0].code == "E022"


def test_proof_annotated_turnstile_checks(nat_ctx):
    env = load_theory([]).with_constant("p", parse_type("Proof")).with_constant("P", parse_type("Proposition"))
    check_sentence(env.typing_context(), parse_formula("|-[p] P"))


def test_type_judgment_sentence(nat_ctx):
    check_sentence(nat_ctx, parse_formula("Successor : Fun(Nat, Nat)"))


def test_render_type_round_trips_through_parse():
    for text in ("Fun(Nat, Bool)", "Union(Nat, Sets(Nat))", "Term(Proposition)", "Pair(R, R)"):
        assert render_type(parse_type(text)) == text
