"""Brute-force enumeration of normal HRM inhabitants.

Ground truth for cross-validation: a bottom-up dynamic program over term
size. Open terms are kept alpha-canonical with free ranks 1..p; only the
order type of ranks matters for HRM and typing, so this loses nothing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import Formula, Imp, formula_sort_key, subformulas
from .terms import (
    App,
    Lam,
    Term,
    Var,
    VarRef,
    alpha_canonical,
    free_vars,
    print_term,
)


@dataclass(frozen=True)
class SearchBound:
    max_nodes: int = 10
    max_var_rank_span: int = 8

    def __post_init__(self) -> None:
        if self.max_nodes < 1 or self.max_var_rank_span < 1:
            raise ValueError("bounds must be >= 1")


@dataclass(frozen=True)
class _State:
    term: Term
    term_type: Formula
    free_types: tuple[Formula, ...]


def _merges(a: tuple[Formula, ...], b: tuple[Formula, ...]):
    """All order-preserving merges of two type sequences into positions
    1..r, sharing a position only at equal types. Yields (r, pos_a, pos_b)."""
    out: list[tuple[int, tuple[int, ...], tuple[int, ...]]] = []

    def go(i: int, j: int, pa: list[int], pb: list[int], nxt: int) -> None:
        if i == len(a) and j == len(b):
            out.append((nxt - 1, tuple(pa), tuple(pb)))
            return
        if i < len(a):
            pa.append(nxt)
            go(i + 1, j, pa, pb, nxt + 1)
            pa.pop()
        if j < len(b):
            pb.append(nxt)
            go(i, j + 1, pa, pb, nxt + 1)
            pb.pop()
        if i < len(a) and j < len(b) and a[i] == b[j]:
            pa.append(nxt)
            pb.append(nxt)
            go(i + 1, j + 1, pa, pb, nxt + 1)
            pa.pop()
            pb.pop()

    go(0, 0, [], [], 1)
    return out


def _rerank_free(m: Term, old_free: tuple[Formula, ...], positions: tuple[int, ...], bound_base: int) -> Term:
    """Map free rank i -> positions[i-1]; move bound ranks above bound_base
    preserving their order."""
    from .terms import bound_refs, _rename_bound  # shared renaming helper

    mapping: dict[VarRef, VarRef] = {}
    for i, tau in enumerate(old_free):
        mapping[VarRef(i + 1, tau)] = VarRef(positions[i], tau)
    bounds = sorted(set(bound_refs(m)), key=lambda r: r.rank)
    for k, ref in enumerate(bounds):
        mapping[ref] = VarRef(bound_base + k + 1, ref.var_type)

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(mapping.get(t.ref, t.ref))
        if isinstance(t, Lam):
            return Lam(mapping.get(t.binder, t.binder), walk(t.body))
        return App(walk(t.fn), walk(t.arg))

    return walk(m)


def _grow(phi: Formula, bound: SearchBound) -> dict[int, list[_State]]:
    subs = subformulas(phi)
    span = bound.max_var_rank_span
    by_size: dict[int, list[_State]] = {}
    seen: set[Term] = set()

    def add(size: int, term: Term, term_type: Formula) -> None:
        canonical = alpha_canonical(term)
        if canonical in seen:
            return
        seen.add(canonical)
        ftypes = tuple(v.var_type for v in free_vars(canonical))
        by_size.setdefault(size, []).append(_State(canonical, term_type, ftypes))

    by_size[1] = []
    for tau in sorted(subs, key=formula_sort_key):
        add(1, Var(VarRef(1, tau)), tau)

    for size in range(2, bound.max_nodes + 1):
        # abstractions over size-1 bodies
        for st in by_size.get(size - 1, []):
            if st.free_types:
                p = len(st.free_types)
                binder = VarRef(p, st.free_types[-1])
                lam_type = Imp(st.free_types[-1], st.term_type)
                if lam_type in subs:
                    add(size, Lam(binder, st.term), lam_type)
        # applications
        for s1 in range(1, size - 1):
            s2 = size - 1 - s1
            for st1 in by_size.get(s1, []):
                if isinstance(st1.term, Lam) or not isinstance(st1.term_type, Imp):
                    continue
                for st2 in by_size.get(s2, []):
                    if st2.term_type != st1.term_type.antecedent:
                        continue
                    for r, pa, pb in _merges(st1.free_types, st2.free_types):
                        if r > span:
                            continue
                        if st1.free_types and (
                            not st2.free_types or pa[-1] > pb[-1]
                        ):
                            continue
                        left = _rerank_free(st1.term, st1.free_types, pa, r)
                        right_base = r + len(set(x.rank for x in _bound_of(left)))
                        right = _rerank_free(st2.term, st2.free_types, pb, right_base)
                        add(size, App(left, right), st1.term_type.consequent)
    return by_size


def _bound_of(m: Term):
    from .terms import bound_refs

    return bound_refs(m)


def enumerate_inhabitants(phi: Formula, bound: SearchBound = SearchBound()) -> list[Term]:
    """All alpha-canonical closed normal HRM terms of type phi within the node
    bound, ordered by (size, canonical print)."""
    by_size = _grow(phi, bound)
    result: list[Term] = []
    for size in sorted(by_size):
        hits = [
            st.term
            for st in by_size[size]
            if not st.free_types and st.term_type == phi
        ]
        result.extend(sorted(hits, key=print_term))
    return result


@dataclass(frozen=True)
class Inhabited:
    witness: Term


@dataclass(frozen=True)
class Unknown:
    pass


def bounded_decide(phi: Formula, bound: SearchBound = SearchBound()) -> Inhabited | Unknown:
    """Semi-decision: the smallest witness within the bound, or Unknown.
    Never claims emptiness."""
    hits = enumerate_inhabitants(phi, bound)
    return Inhabited(hits[0]) if hits else Unknown()
