import pytest

from ticket.formula import (
    Atom,
    FormulaSyntaxError,
    Imp,
    Signature,
    formula_sort_key,
    parse_formula,
    print_formula,
    signature_of,
    subformulas,
)


def test_parse_atom():
    assert parse_formula("a") == Atom("a")


def test_arrow_right_associative():
    assert parse_formula("a->b->c") == Imp(Atom("a"), Imp(Atom("b"), Atom("c")))


def test_parens_override_associativity():
    assert parse_formula("(a->b)->c") == Imp(Imp(Atom("a"), Atom("b")), Atom("c"))


def test_print_minimal_parens():
    assert print_formula(parse_formula("a->b->c")) == "a->b->c"
    assert print_formula(parse_formula("(a->b)->c")) == "(a->b)->c"


@pytest.mark.parametrize(
    "text",
    ["a->a", "(a->b)->((b->c)->(a->c))", "((a->b)->a)->a", "x1->x2->x1"],
)
def test_roundtrip(text):
    phi = parse_formula(text)
    assert parse_formula(print_formula(phi)) == phi


@pytest.mark.parametrize("bad", ["", "->", "a->", "(a", "a)", "a b", "a-<b", "((("])
def test_syntax_errors(bad):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(bad)


def test_subformulas():
    phi = parse_formula("(a->b)->a")
    subs = subformulas(phi)
    expected = {phi, parse_formula("a->b"), Atom("a"), Atom("b")}
    assert subs == frozenset(expected)


def test_subformulas_dedup():
    phi = parse_formula("a->a->a")
    assert subformulas(phi) == frozenset({phi, parse_formula("a->a"), Atom("a")})


def test_signature_of():
    phi = parse_formula("(a->b)->a")
    sig = signature_of(phi)
    assert isinstance(sig, Signature)
    assert subformulas(phi) >= sig.leaf_formulas
    assert subformulas(phi) >= sig.app_tags


def test_sort_key_total_order():
    phis = [parse_formula(s) for s in ["b", "a", "a->b", "a->a", "(a->b)->a"]]
    ordered = sorted(phis, key=formula_sort_key)
    assert sorted(ordered, key=formula_sort_key) == ordered
    assert len({formula_sort_key(p) for p in phis}) == len(phis)
