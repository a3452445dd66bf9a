"""Round-trip properties: parse(render(x)) == x, name-exact."""

import pytest

from dlk import ast
from dlk.parser import parse_formula
from dlk.render import render

ATOMS = (ast.ConstRef("P"), ast.ConstRef("Q"))


def enumerate_formulas(max_height: int):
    """Exhaustive connective trees over atoms P, Q.

    Atoms have height 1; a connective node is one higher than its tallest
    child.  Height 3 therefore allows two connective layers.
    """
    by_height = {1: list(ATOMS)}
    for h in range(2, max_height + 1):
        shorter = [f for hh in range(1, h) for f in by_height[hh]]
        level = [ast.Not(f) for f in by_height[h - 1]]
        for ctor in (ast.And, ast.Or, ast.Implies, ast.Iff):
            for left in shorter:
                for right in shorter:
                    if max(_height(left), _height(right)) == h - 1:
                        level.append(ctor(left, right))
        by_height[h] = level
    return [f for hh in range(1, max_height + 1) for f in by_height[hh]]


def _height(node):
    kids = ast.child_nodes(node)
    return 1 + max((_height(k) for k in kids), default=0)


def test_exhaustive_depth3_round_trip():
    formulas = enumerate_formulas(3)
    # 2 atoms + 18 of height 2 + 1602 of height 3; independently,
    # |height<=3| = 2 atoms + not(|height<=2|) + 4 * |height<=2|^2 = 2 + 20 + 1600.
    assert len(formulas) == 1622
    for f in formulas:
        assert parse_formula(render(f)) == f


def test_render_spec_examples():
    assert render(parse_formula("P /\\ Q")) == "P /\\ Q"


def test_implies_right_associates():
    flat = parse_formula("P => Q => R")
    assert flat == ast.Implies(ast.ConstRef("P"), ast.Implies(ast.ConstRef("Q"), ast.ConstRef("R")))
    assert parse_formula(render(flat)) == flat
    grouped = parse_formula("(P => Q) => R")
    assert grouped != flat
    assert parse_formula(render(grouped)) == grouped


@pytest.mark.parametrize(
    "text",
    [
        "(b ? s1 : s2)",
        "(b ? (x : Nat) : R)",
        "forall [n: Nat] -> exists [m: Nat] -> m > n",
        "|- (P0 /\\ not P0)",
        "not exists [P: Proposition] -> (|- (P /\\ not P))",
        "[i: Nat] -> i = i",
        "Let {loop := [x: Nat] -> loop.[x]}, loop",
        "(P, Q |- R, S)",
        "|-[p] P",
        "quote(0 = 0)",
        "abstract(s)[x] <=> x = k",
        "{} subset {0}",
        "f[a, b, c]",
        "Elementwise[f][s] : Set(Nat)",
        "x <= b",
        "P <=> not (|- P)",
    ],
)
def test_round_trip_cases(text):
    tree = parse_formula(text)
    assert parse_formula(render(tree)) == tree


def test_round_trip_constructed_dangling_binder():
    # A binder buried at the right edge of a left operand must not capture the
    # following connective when rendered.
    inner = parse_formula("x = [i: Nat] -> i = i")
    tree = ast.And(inner, ast.ConstRef("P"))
    assert parse_formula(render(tree)) == tree
    tree2 = ast.Or(ast.And(ast.ConstRef("Q"), parse_formula("forall [x: Nat] -> x = x")), ast.ConstRef("R"))
    assert parse_formula(render(tree2)) == tree2


def test_render_is_deterministic():
    tree = parse_formula("(P => Q) <=> (not Q => not P)")
    assert render(tree) == render(parse_formula(render(tree)))
