"""Compactness of normal inhabitants and the constructive term surgeries.

The three surgeries are: reading off a full extraction chain from a term
(every free variable's type is extractible at its occurrence addresses),
renaming free variables along an alternative extraction chain (switch_var),
and compressing a term down a vertical graft of its blueprint
(compress_term). Together they let a non-compact inhabitant be shrunk.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .blueprint import (
    Blueprint,
    Leaf,
    NotExtractable,
    blueprint_of,
    extract_at,
    extractable_leaves,
    f_of,
    print_blueprint,
    relative_depth,
    single_grafts,
    subtree_at,
    up_closure,
)
from .formula import Formula, subformulas
from .terms import (
    Address,
    App,
    Lam,
    Term,
    TermError,
    TypeMismatch,
    Var,
    VarRef,
    addresses,
    all_ranks,
    bound_refs,
    free_vars,
    is_nf_inhabitant,
    max_rank,
    node_count,
    rename_bound_above,
    replace_at,
    subterm_at,
    type_of,
)


class ChainInvalid(TermError):
    pass


class NotACompression(TermError):
    pass


@dataclass(frozen=True)
class ChainStep:
    """One extraction block: the same formula removed at each address in
    the given single-step order. `variable` records which free variable the
    block came from when the chain was read off a term."""

    formula: Formula
    step_order: tuple[Address, ...]
    variable: VarRef | None = None

    def __post_init__(self) -> None:
        if not self.step_order:
            raise ChainInvalid("empty extraction block")
        if len(set(self.step_order)) != len(self.step_order):
            raise ChainInvalid("duplicate address inside a block")


@dataclass(frozen=True)
class ExtractionChain:
    """Blocks in extraction order (first-extracted block first). The block
    formulas read in reverse give the extractible sequence the chain
    realizes."""

    steps: tuple[ChainStep, ...]

    def sequence(self) -> tuple[Formula, ...]:
        return tuple(s.formula for s in reversed(self.steps))


def replay_chain(b: Blueprint, chain: ExtractionChain) -> None:
    """Check that the chain empties b; raises ChainInvalid otherwise."""
    for step in chain.steps:
        for a in step.step_order:
            try:
                b = extract_at(b, a, step.formula)
            except NotExtractable as exc:
                raise ChainInvalid(str(exc)) from exc
    if not b.is_empty():
        raise ChainInvalid("chain does not empty the blueprint")


def _greedy_block_order(
    b: Blueprint, addrs: set[Address], phi: Formula
) -> tuple[tuple[Address, ...], Blueprint]:
    """A valid single-step order extracting phi at exactly `addrs`.

    Extractibility only grows as entries disappear, so taking any currently
    extractable address never gets stuck when some valid order exists."""
    order: list[Address] = []
    remaining = set(addrs)
    while remaining:
        for a in sorted(remaining):
            try:
                nxt = extract_at(b, a, phi)
            except NotExtractable:
                continue
            b = nxt
            order.append(a)
            remaining.discard(a)
            break
        else:
            raise ChainInvalid(f"block of {len(addrs)} addresses is stuck")
    return tuple(order), b


def lambda_prefix(m: Term, a: Address) -> tuple[VarRef, ...]:
    """Binders passed on the way from the root to a (exclusive of a)."""
    out: list[VarRef] = []
    t = m
    for step in a:
        if isinstance(t, Lam):
            out.append(t.binder)
            t = t.body
        elif isinstance(t, App):
            t = t.fn if step == 1 else t.arg
        else:
            raise TermError("address out of range")
    return tuple(out)


def _occurrences(m: Term, ref: VarRef) -> list[Address]:
    return sorted(a for a, t in addresses(m) if isinstance(t, Var) and t.ref == ref)


def abstract_extract_chain(m: Term) -> ExtractionChain:
    """The canonical full extraction of blueprint_of(m): each free variable's
    type at its occurrence addresses, greatest variable first."""
    type_of(m)
    b = blueprint_of(m)
    steps: list[ChainStep] = []
    for x in reversed(free_vars(m)):
        occ = set(_occurrences(m, x))
        order, b = _greedy_block_order(b, occ, x.var_type)
        steps.append(ChainStep(x.var_type, order, x))
    if not b.is_empty():
        raise ChainInvalid("stable part not exhausted by free-variable blocks")
    return ExtractionChain(tuple(steps))


def chain_for_sequence(b: Blueprint, chi: tuple[Formula, ...]) -> ExtractionChain | None:
    """A full extraction of b whose block formulas realize chi (chi oriented
    last-extracted-first, as produced by f_of). None if chi is not in F(b)."""
    blocks = tuple(reversed(chi))
    if not blocks:
        return ExtractionChain(()) if b.is_empty() else None
    failed: set[tuple[Blueprint, int, bool]] = set()

    def dfs(cur: Blueprint, idx: int, in_block: bool) -> list[tuple[int, Address]] | None:
        if cur.is_empty():
            return [] if idx == len(blocks) - 1 and in_block else None
        key = (cur, idx, in_block)
        if key in failed:
            return None
        if in_block and idx + 1 < len(blocks):
            rest = dfs(cur, idx + 1, False)
            if rest is not None:
                return rest
        for a, phi in extractable_leaves(cur):
            if phi != blocks[idx]:
                continue
            rest = dfs(extract_at(cur, a, phi), idx, True)
            if rest is not None:
                return [(idx, a)] + rest
        failed.add(key)
        return None

    raw = dfs(b, 0, False)
    if raw is None:
        return None
    steps: list[ChainStep] = []
    current_idx = -1
    current: list[Address] = []
    for idx, a in raw:
        if idx != current_idx:
            if current:
                steps.append(ChainStep(blocks[current_idx], tuple(current)))
            current_idx, current = idx, []
        current.append(a)
    if current:
        steps.append(ChainStep(blocks[current_idx], tuple(current)))
    if len(steps) != len(blocks):
        return None
    return ExtractionChain(tuple(steps))


@dataclass
class _Fresh:
    next_rank: int

    def take(self, n: int = 1) -> int:
        base = self.next_rank
        self.next_rank += n
        return base


def _strip(steps, stargets, side: int):
    out_steps: list[tuple[Formula, tuple[Address, ...]]] = []
    out_targets: list[VarRef] = []
    for (phi, order), tgt in zip(steps, stargets):
        sub = tuple(a[1:] for a in order if a[0] == side)
        if sub:
            out_steps.append((phi, sub))
            out_targets.append(tgt)
    return out_steps, out_targets


def _switch(m: Term, steps, stargets, fresh: _Fresh) -> Term:
    if not steps:
        if free_vars(m):
            raise ChainInvalid("open subterm with no extraction block left")
        k = len(set(bound_refs(m)))
        return rename_bound_above(m, fresh.take(k) - 1) if k else m
    if isinstance(m, Var):
        phi, order = steps[0]
        if len(steps) != 1 or order != ((),):
            raise ChainInvalid("variable subterm needs a single unit block")
        return Var(stargets[0])
    if isinstance(m, Lam):
        occ = set(_occurrences(m.body, m.binder))
        order, _ = _greedy_block_order(blueprint_of(m.body), occ, m.binder.var_type)
        new_ref = VarRef(fresh.take(), m.binder.var_type)
        body_steps = [(m.binder.var_type, order)]
        stripped = [(phi, tuple(a[1:] for a in so)) for phi, so in steps]
        body = _switch(m.body, body_steps + stripped, [new_ref] + list(stargets), fresh)
        return Lam(new_ref, body)
    steps1, t1 = _strip(steps, stargets, 1)
    steps2, t2 = _strip(steps, stargets, 2)
    fn = _switch(m.fn, steps1, t1, fresh)
    arg = _switch(m.arg, steps2, t2, fresh)
    return App(fn, arg)


def switch_var(m: Term, chain: ExtractionChain, targets: tuple[VarRef, ...]) -> Term:
    """Rebuild m with free variables `targets`, the i-th target occurring at
    the chain's i-th block (targets increasing, blocks last-extracted-first).

    Preserves the tree domain, the blueprint and the type."""
    type_of(m)
    if len(targets) != len(chain.steps):
        raise ChainInvalid("one target per block required")
    ranks = [t.rank for t in targets]
    if sorted(set(ranks)) != ranks:
        raise ChainInvalid("targets must be strictly increasing")
    for t, step in zip(targets, reversed(chain.steps)):
        if t.var_type != step.formula:
            raise TypeMismatch("target type differs from its block formula")
    replay_chain(blueprint_of(m), chain)
    fresh = _Fresh((max(ranks) if ranks else 0) + 1)
    steps = [(s.formula, s.step_order) for s in chain.steps]
    return _switch(m, steps, list(reversed(targets)), fresh)


# --- vertical term compression ---------------------------------------------

def _rerank_all_above(m: Term, base: int) -> Term:
    """Shift every rank of m (free and bound) above base, preserving order."""
    ranks = sorted(all_ranks(m))
    mapping = {r: base + i + 1 for i, r in enumerate(ranks)}

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(VarRef(mapping[t.ref.rank], t.ref.var_type))
        if isinstance(t, Lam):
            return Lam(VarRef(mapping[t.binder.rank], t.binder.var_type), walk(t.body))
        return App(walk(t.fn), walk(t.arg))

    return walk(m)


def _graft_step(m: Term, a: Address, c: Address) -> Term:
    """One vertical graft on the term side: realize graft(beta, a, beta|c)."""
    if a == ():
        return subterm_at(m, c)
    if isinstance(m, App):
        side = a[0]
        sub = m.fn if side == 1 else m.arg
        new_sub = _graft_step(sub, a[1:], c[1:])
        left = new_sub if side == 1 else m.fn
        right_raw = new_sub if side == 2 else m.arg
        right = _rerank_all_above(right_raw, max_rank(left))
        return App(left, right)
    if isinstance(m, Lam):
        body = _graft_step(m.body, a[1:], c[1:])
        chi = m.binder.var_type
        occ = set(_occurrences(m.body, m.binder))
        bb = blueprint_of(body)
        order, rest = _greedy_block_order(bb, occ, chi)
        steps: list[ChainStep] = [ChainStep(chi, order)]
        while not rest.is_empty():
            addr, phi = sorted(extractable_leaves(rest))[0]
            steps.append(ChainStep(phi, (addr,)))
            rest = extract_at(rest, addr, phi)
        r = len(steps)
        targets = tuple(
            VarRef(i + 1, steps[r - 1 - i].formula) for i in range(r)
        )
        new_body = switch_var(body, ExtractionChain(tuple(steps)), targets)
        return Lam(VarRef(r, chi), new_body)
    raise NotACompression("graft address walks past a variable")


def compress_term(m: Term, alpha: Blueprint) -> Term:
    """A term of the same kind and type as m with blueprint alpha and no more
    nodes, where alpha is a vertical graft (possibly iterated) of m's
    blueprint."""
    type_of(m)
    beta = blueprint_of(m)
    # breadth-first graft path from beta to alpha
    parent: dict[Blueprint, tuple[Blueprint, Address, Address]] = {}
    seen = {beta}
    queue = deque([beta])
    found = beta == alpha
    while queue and not found:
        cur = queue.popleft()
        for ga, gc, nxt in single_grafts(cur):
            if nxt in seen:
                continue
            seen.add(nxt)
            parent[nxt] = (cur, ga, gc)
            if nxt == alpha:
                found = True
                break
            queue.append(nxt)
    if not found:
        raise NotACompression(
            f"{print_blueprint(alpha)} is not a graft of {print_blueprint(beta)}"
        )
    path: list[tuple[Address, Address]] = []
    node = alpha
    while node != beta:
        node, ga, gc = parent[node]
        path.append((ga, gc))
    out = m
    for ga, gc in reversed(path):
        out = _graft_step(out, ga, gc)
    return out


# --- compactness ------------------------------------------------------------

def _kind(t: Term) -> tuple[str, Formula]:
    cls = "var" if isinstance(t, Var) else "lam" if isinstance(t, Lam) else "app"
    return (cls, type_of(t))


def is_locally_compact(m: Term, phi: Formula) -> bool:
    """Blueprint depth at every address stays within the binder-count bound."""
    bound = len(subformulas(phi))
    for a, t in addresses(m):
        if relative_depth(blueprint_of(t)) > len(lambda_prefix(m, a)) * bound:
            return False
    return True


def compact_witness(
    m: Term,
) -> tuple[Address, Address, Blueprint] | None:
    """The first (a, b, alpha') making m non-compact, in lexicographic (a, b)
    order with the smallest graft alpha' first; None if m is compact."""
    addr_list = sorted(a for a, _ in addresses(m))
    kinds = {a: _kind(subterm_at(m, a)) for a in addr_list}
    for a in addr_list:
        chi = tuple(v.var_type for v in free_vars(subterm_at(m, a)))
        for b in addr_list:
            if not (len(a) < len(b) and b[: len(a)] == a):
                continue
            if kinds[a] != kinds[b]:
                continue
            grafts = sorted(
                up_closure(blueprint_of(subterm_at(m, b))),
                key=lambda g: (len(g), print_blueprint(g)),
            )
            for alpha in grafts:
                if chi in f_of(alpha):
                    return (a, b, alpha)
    return None


def is_compact(m: Term) -> bool:
    return compact_witness(m) is None


def shrink(m: Term, phi: Formula) -> Term | None:
    """One shrinking step: replace the outer subterm of a non-compactness
    witness by a compressed re-targeted copy of the inner one. Returns a
    strictly smaller inhabitant of phi, or None when m is compact."""
    witness = compact_witness(m)
    if witness is None:
        return None
    a, b, alpha = witness
    targets = free_vars(subterm_at(m, a))
    chi = tuple(v.var_type for v in targets)
    compressed = compress_term(subterm_at(m, b), alpha)
    chain = chain_for_sequence(blueprint_of(compressed), chi)
    assert chain is not None
    replacement = switch_var(compressed, chain, targets)
    replacement = rename_bound_above(replacement, max_rank(m))
    out = replace_at(m, a, replacement)
    assert node_count(out) < node_count(m)
    assert is_nf_inhabitant(out, phi)
    return out


def shrink_fixpoint(m: Term, phi: Formula) -> Term:
    """Iterate shrink until compact."""
    while True:
        nxt = shrink(m, phi)
        if nxt is None:
            return m
        m = nxt
