"""HRM lambda terms as labeled trees.

Variables carry a rank (a positive integer realizing the total order on
variables) and a declared type. Terms are not identified modulo alpha
conversion; `alpha_canonical` provides the representative used for
deduplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .formula import Formula, Imp, print_formula

Address = tuple[int, ...]


class TermError(Exception):
    pass


class InvalidTerm(TermError):
    """Structural or convention violation (rank reuse across types, etc.)."""


class TypingError(TermError):
    pass


class NotHRM(TypingError):
    pass


class TypeMismatch(TypingError):
    pass


class PreconditionViolated(TermError):
    pass


@dataclass(frozen=True)
class VarRef:
    rank: int
    var_type: Formula

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise InvalidTerm(f"rank must be positive, got {self.rank}")


@dataclass(frozen=True)
class Var:
    ref: VarRef


@dataclass(frozen=True)
class Lam:
    binder: VarRef
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


Term = Var | Lam | App


def subterm_at(m: Term, a: Address) -> Term:
    for step in a:
        if isinstance(m, Lam):
            if step != 1:
                raise TermError(f"address step {step} at abstraction node")
            m = m.body
        elif isinstance(m, App):
            if step == 1:
                m = m.fn
            elif step == 2:
                m = m.arg
            else:
                raise TermError(f"address step {step} at application node")
        else:
            raise TermError("address walks past a leaf")
    return m


def addresses(m: Term) -> Iterator[tuple[Address, Term]]:
    """All (address, subterm) pairs in preorder."""
    stack: list[tuple[Address, Term]] = [((), m)]
    while stack:
        a, t = stack.pop()
        yield a, t
        if isinstance(t, Lam):
            stack.append((a + (1,), t.body))
        elif isinstance(t, App):
            stack.append((a + (2,), t.arg))
            stack.append((a + (1,), t.fn))


def node_count(m: Term) -> int:
    return sum(1 for _ in addresses(m))


def _merge_free(left: dict[int, Formula], right: dict[int, Formula]) -> dict[int, Formula]:
    merged = dict(left)
    for rank, ft in right.items():
        if merged.setdefault(rank, ft) != ft:
            raise InvalidTerm(f"rank {rank} used at two different types")
    return merged


def _free_map(m: Term) -> dict[int, Formula]:
    if isinstance(m, Var):
        return {m.ref.rank: m.ref.var_type}
    if isinstance(m, Lam):
        inner = _free_map(m.body)
        if m.binder.rank in inner and inner[m.binder.rank] != m.binder.var_type:
            raise InvalidTerm(f"binder rank {m.binder.rank} occurs at a different type")
        inner = dict(inner)
        inner.pop(m.binder.rank, None)
        return inner
    return _merge_free(_free_map(m.fn), _free_map(m.arg))


def free_vars(m: Term) -> tuple[VarRef, ...]:
    """Free variables as a strictly increasing sequence of VarRef (by rank)."""
    fm = _free_map(m)
    return tuple(VarRef(rank, fm[rank]) for rank in sorted(fm))


def bound_refs(m: Term) -> list[VarRef]:
    """Binder references in preorder traversal order."""
    out: list[VarRef] = []
    for _, t in sorted(addresses(m)):
        if isinstance(t, Lam):
            out.append(t.binder)
    return out


def all_ranks(m: Term) -> set[int]:
    ranks: set[int] = set()
    for _, t in addresses(m):
        if isinstance(t, Var):
            ranks.add(t.ref.rank)
        elif isinstance(t, Lam):
            ranks.add(t.binder.rank)
    return ranks


def max_rank(m: Term) -> int:
    ranks = all_ranks(m)
    return max(ranks) if ranks else 0


def check_conventions(m: Term) -> None:
    """Bound-variable convention: distinct binders use distinct ranks and no
    rank is both free and bound. Raises InvalidTerm on violation."""
    bounds = bound_refs(m)
    bound_ranks = [b.rank for b in bounds]
    if len(bound_ranks) != len(set(bound_ranks)):
        raise InvalidTerm("duplicate bound rank")
    free_ranks = set(_free_map(m))
    if free_ranks & set(bound_ranks):
        raise InvalidTerm("rank both free and bound")


def is_well_formed(m: Term) -> bool:
    try:
        check_conventions(m)
        free_vars(m)
    except InvalidTerm:
        return False
    return True


def is_hrm(m: Term) -> bool:
    try:
        return _is_hrm(m)
    except InvalidTerm:
        return False


def _is_hrm(m: Term) -> bool:
    if isinstance(m, Var):
        return True
    if isinstance(m, Lam):
        if not _is_hrm(m.body):
            return False
        fm = _free_map(m.body)
        return bool(fm) and max(fm) == m.binder.rank and fm[m.binder.rank] == m.binder.var_type
    if not (_is_hrm(m.fn) and _is_hrm(m.arg)):
        return False
    left, right = _free_map(m.fn), _free_map(m.arg)
    _merge_free(left, right)
    if not left:
        return True
    return bool(right) and max(left) <= max(right)


def type_of(m: Term) -> Formula:
    """Type of m w.r.t. the declared variable types; raises on untypable terms.

    Typability subsumes the HRM conditions: abstraction requires the binder to
    be the greatest free variable of the body, application requires the left
    free variables to be dominated by a right free variable.
    """
    if isinstance(m, Var):
        return m.ref.var_type
    if isinstance(m, Lam):
        body_type = type_of(m.body)
        fm = _free_map(m.body)
        if not fm or max(fm) != m.binder.rank:
            raise NotHRM("binder is not the greatest free variable of its body")
        if fm[m.binder.rank] != m.binder.var_type:
            raise TypeMismatch("binder type differs from its occurrences")
        return Imp(m.binder.var_type, body_type)
    fn_type = type_of(m.fn)
    arg_type = type_of(m.arg)
    if not isinstance(fn_type, Imp):
        raise TypeMismatch("left subterm of application is not of arrow type")
    if fn_type.antecedent != arg_type:
        raise TypeMismatch("argument type does not match the antecedent")
    left, right = _free_map(m.fn), _free_map(m.arg)
    _merge_free(left, right)
    if left and (not right or max(left) > max(right)):
        raise NotHRM("application left free variables not dominated by the right")
    return fn_type.consequent


def is_normal(m: Term) -> bool:
    if isinstance(m, Var):
        return True
    if isinstance(m, Lam):
        return is_normal(m.body)
    if isinstance(m.fn, Lam):
        return False
    return is_normal(m.fn) and is_normal(m.arg)


def is_nf_inhabitant(m: Term, phi: Formula) -> bool:
    try:
        check_conventions(m)
        if free_vars(m):
            return False
        return is_normal(m) and type_of(m) == phi
    except TermError:
        return False


def _rename_bound(m: Term, mapping: dict[VarRef, VarRef]) -> Term:
    """Replace binder refs and their bound occurrences per mapping."""
    if isinstance(m, Var):
        return Var(mapping.get(m.ref, m.ref))
    if isinstance(m, Lam):
        new_binder = mapping.get(m.binder, m.binder)
        return Lam(new_binder, _rename_bound(m.body, mapping))
    return App(_rename_bound(m.fn, mapping), _rename_bound(m.arg, mapping))


def rename_bound_above(m: Term, base: int) -> Term:
    """Re-rank every bound variable of m strictly above `base`, preserving the
    relative rank order among bound variables. Free occurrences untouched."""
    bounds = sorted(set(bound_refs(m)), key=lambda r: r.rank)
    mapping = {old: VarRef(base + i + 1, old.var_type) for i, old in enumerate(bounds)}
    return _rename_bound(m, mapping) if mapping else m


def hrm_substitute(p: Term, x: VarRef, q: Term) -> Term:
    """Capture-free substitution p<x := q> under the HRM side-conditions.

    Preconditions (checked): q typed of var_type(x); if q is closed and x is
    free in p then x is the least free variable of p; if q is open then every
    free z<x of p satisfies z <= max Free(q), every free z>x satisfies
    max Free(q) < z, and max Free(q) is below every bound rank of p.
    """
    q_type = type_of(q)
    if q_type != x.var_type:
        raise TypeMismatch("substituted term type differs from the variable's type")
    type_of(p)
    p_free = _free_map(p)
    if x.rank in p_free and p_free[x.rank] != x.var_type:
        raise PreconditionViolated("variable occurs in p at a different type")
    q_free = _free_map(q)
    if not q_free:
        if x.rank in p_free and min(p_free) != x.rank:
            raise PreconditionViolated("q closed but x is not the least free variable of p")
    else:
        top = max(q_free)
        for z in p_free:
            if z < x.rank and z > top:
                raise PreconditionViolated("free variable below x exceeds max Free(q)")
            if z > x.rank and top >= z:
                raise PreconditionViolated("max Free(q) not below a free variable above x")
        for b in bound_refs(p):
            if b.rank <= top:
                raise PreconditionViolated("max Free(q) not below every bound rank of p")

    fresh_base = max(max_rank(p), max_rank(q))
    p_bound_ranks = {b.rank for b in bound_refs(p)}
    copies = 0

    def replace(t: Term) -> Term:
        nonlocal copies, fresh_base
        if isinstance(t, Var):
            if t.ref == x:
                copies += 1
                q_bounds = {b.rank for b in bound_refs(q)}
                if copies == 1 and not (q_bounds & p_bound_ranks):
                    return q
                # later copies (or colliding first copy) get fresh bound ranks
                out = rename_bound_above(q, fresh_base)
                fresh_base = max(fresh_base, max_rank(out))
                return out
            return t
        if isinstance(t, Lam):
            return Lam(t.binder, replace(t.body))
        return App(replace(t.fn), replace(t.arg))

    return replace(p)


def _leftmost_outermost_redex(m: Term, at: Address = ()) -> Address | None:
    if isinstance(m, Var):
        return None
    if isinstance(m, Lam):
        return _leftmost_outermost_redex(m.body, at + (1,))
    if isinstance(m.fn, Lam):
        return at
    left = _leftmost_outermost_redex(m.fn, at + (1,))
    if left is not None:
        return left
    return _leftmost_outermost_redex(m.arg, at + (2,))


def replace_at(m: Term, a: Address, sub: Term) -> Term:
    if not a:
        return sub
    step, rest = a[0], a[1:]
    if isinstance(m, Lam):
        if step != 1:
            raise TermError("bad address")
        return Lam(m.binder, replace_at(m.body, rest, sub))
    if isinstance(m, App):
        if step == 1:
            return App(replace_at(m.fn, rest, sub), m.arg)
        if step == 2:
            return App(m.fn, replace_at(m.arg, rest, sub))
    raise TermError("bad address")


def hrm_normalize(m: Term) -> Term:
    """Normalize a typed term, contracting the leftmost-outermost redex and
    renaming the redex body's bound variables above everything first so that
    each contraction is a legal hrm_substitute."""
    type_of(m)
    while True:
        a = _leftmost_outermost_redex(m)
        if a is None:
            return m
        redex = subterm_at(m, a)
        assert isinstance(redex, App) and isinstance(redex.fn, Lam)
        lam, q = redex.fn, redex.arg
        body = rename_bound_above(lam.body, max_rank(m))
        reduced = hrm_substitute(body, lam.binder, q)
        m = replace_at(m, a, reduced)


def alpha_canonical(m: Term) -> Term:
    """Deterministic representative: bound ranks become the smallest fresh
    ranks above all free ranks, assigned in original rank order (so the HRM
    rank constraints are preserved)."""
    type_of(m)
    free = _free_map(m)
    base = max(free) if free else 0
    bounds = sorted(set(bound_refs(m)), key=lambda r: r.rank)
    mapping = {old: VarRef(base + i + 1, old.var_type) for i, old in enumerate(bounds)}
    return _rename_bound(m, mapping) if mapping else m


def print_term(m: Term) -> str:
    """Canonical printing: `\\x<rank>:type. body`, application left-associative."""
    if isinstance(m, Var):
        return f"x{m.ref.rank}"
    if isinstance(m, Lam):
        binder = f"\\x{m.binder.rank}:{print_formula(m.binder.var_type)}"
        return f"{binder}. {print_term(m.body)}"
    fn = print_term(m.fn)
    if isinstance(m.fn, Lam):
        fn = f"({fn})"
    arg = print_term(m.arg)
    if not isinstance(m.arg, Var):
        arg = f"({arg})"
    return f"{fn} {arg}"
