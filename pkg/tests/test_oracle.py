import pytest

from ticket.formula import parse_formula
from ticket.oracle import Inhabited, SearchBound, Unknown, bounded_decide, enumerate_inhabitants
from ticket.terms import is_nf_inhabitant, node_count, print_term


def test_identity_smallest():
    phi = parse_formula("a->a")
    hits = enumerate_inhabitants(phi, SearchBound(max_nodes=6))
    assert hits
    assert print_term(hits[0]) == "\\x1:a. x1"


def test_witnesses_are_inhabitants():
    phi = parse_formula("(a->(a->b))->(a->b)")
    for m in enumerate_inhabitants(phi, SearchBound(max_nodes=8)):
        assert is_nf_inhabitant(m, phi)


def test_ordered_by_size():
    phi = parse_formula("(a->a)->(a->a)")
    hits = enumerate_inhabitants(phi, SearchBound(max_nodes=8))
    sizes = [node_count(m) for m in hits]
    assert sizes == sorted(sizes)
    assert len(hits) > 1


def test_bounded_decide_positive():
    res = bounded_decide(parse_formula("(x->y)->((p->x)->(p->y))"))
    assert isinstance(res, Inhabited)
    assert print_term(res.witness) == "\\x1:x->y. \\x2:p->x. \\x3:p. x1 (x2 x3)"


@pytest.mark.parametrize("text", ["a->(b->a)", "a->(a->a)", "((a->b)->a)->a", "a"])
def test_bounded_decide_unknown_on_empty(text):
    res = bounded_decide(parse_formula(text), SearchBound(max_nodes=8))
    assert isinstance(res, Unknown)


def test_bound_validation():
    with pytest.raises(ValueError):
        SearchBound(max_nodes=0)
