import pytest

from dlk import ast
from dlk.diagnostics import DiagnosticError
from dlk.parser import ConstantDecl, DefDecl, ProofDecl, UseDecl, parse_file, parse_formula


def test_parse_file_single_definition():
    src = 'def Consistent := not exists [P: Proposition] -> (|- (P /\\ not P))'
    sf = parse_file(src)
    assert len(sf.declarations) == 1
    decl = sf.declarations[0]
    assert isinstance(decl, DefDecl)
    assert decl.name == "Consistent"
    assert isinstance(decl.body, ast.Not)


def test_parse_file_empty():
    sf = parse_file("")
    assert sf.declarations == ()


def test_parse_file_unbalanced_paren_is_e001():
    with pytest.raises(DiagnosticError) as exc:
        parse_file("proof X : (P /\\ ")
    assert exc.value.code == "E001"


def test_parse_formula_nested_quantifiers():
    f = parse_formula("forall [n: Nat] -> exists [m: Nat] -> m > n")
    assert isinstance(f, ast.Forall)
    assert isinstance(f.body, ast.Exists)
    inner = f.body.body
    assert isinstance(inner, ast.Apply)  # m > n sugars to `>`[(m, n)]
    assert isinstance(inner.fn, ast.ConstRef) and inner.fn.name == ">"


def test_parse_formula_atom():
    f = parse_formula("P")
    assert isinstance(f, ast.ConstRef)
    assert f.name == "P"


def test_parse_formula_bare_turnstile():
    f = parse_formula("|- (P0 /\\ not P0)")
    assert isinstance(f, ast.Turnstile)
    assert f.antecedents == ()
    assert len(f.consequents) == 1
    assert isinstance(f.consequents[0], ast.And)


def test_parse_is_deterministic():
    text = "forall [n: Nat] -> (n = n) /\\ (|- P)"
    assert parse_formula(text) == parse_formula(text)
    with pytest.raises(DiagnosticError) as first:
        parse_formula("P /\\ ")
    with pytest.raises(DiagnosticError) as second:
        parse_formula("P /\\ ")
    assert first.value.diagnostic == second.value.diagnostic


def test_parse_binder_requires_annotation():
    with pytest.raises(DiagnosticError) as exc:
        parse_formula("forall [x] -> P")
    assert exc.value.code == "E001"


@pytest.mark.parametrize(
    "text",
    [
        "P /\\ Q",
        "not exists [P: Proposition] -> (|- (P /\\ not P))",
        "(P, Q |- R)",
        "Inductive[P] <=> (forall [i: Nat] -> P[i])",
        "(b ? x : y) = z",
    ],
)
def test_every_parsed_node_has_a_nested_span(text):
    root = parse_formula(text)
    for node in ast.walk(root):
        assert node.span.end >= node.span.start
        assert node.span.end > 0, f"{node!r} lost its span"
        for child in ast.child_nodes(node):
            assert child.span.start >= node.span.start
            assert child.span.end <= node.span.end


def test_parse_declarations_preserve_order_and_spans():
    src = (
        "use nat\n"
        "constant P : Proposition\n"
        "def Two := Successor[Successor[0]]\n"
        "proof Trivial : P => P\n"
        "  1. assume P\n"
        "  2. conclude P => P by implies_intro(1)\n"
    )
    sf = parse_file(src, "demo.dlp")
    kinds = [type(d) for d in sf.declarations]
    assert kinds == [UseDecl, ConstantDecl, DefDecl, ProofDecl]
    lines = [d.span.line for d in sf.declarations]
    assert lines == sorted(lines)
    proof = sf.declarations[-1]
    assert [s.number for s in proof.steps] == [1, 2]
    assert proof.steps[0].kind == "assume"
    assert proof.steps[1].rule == "implies_intro"


def test_provable_sugar_is_a_bare_turnstile():
    assert parse_formula("provable(P)") == parse_formula("(|- P)")


def test_multi_argument_application_is_pair_sugar():
    assert parse_formula("f[a, b]") == parse_formula("f[(a, b)]")
