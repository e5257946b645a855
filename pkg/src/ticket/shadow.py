"""Shadows of inhabitants, compact-shadow enumeration and the decision engine.

A shadow abstracts a normal inhabitant into a tree with the same domain,
labeling every address with (free-variable type sequence, compressed
blueprint, subterm type). Compact shadows of a formula form a finite set, so
inhabitation reduces to enumerating their tree domains and searching for an
inhabitant per domain.

The enumeration works on a quotient: states carry the (arity, chi, psi)
labeling plus one witness blueprint per node. Ancestor/descendant compactness
constrains a node only through its own blueprint and the ancestors' chi
sequences, so witnesses can be chosen per node. The chosen witness is a
right-leaf comb realizing exactly the chi sequence; when its spine tags can
be made pairwise distinct its graft closure is minimal, which makes the
pruning test exact. Labels are further restricted to the combinations a term
can induce (leaf = variable, unary = abstraction, binary = application with
an order-preserving free-variable merge); every shadow of a compact
inhabitant satisfies these, so no inhabited domain is lost.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any

from .blueprint import (
    Blueprint,
    Leaf,
    admits_sequence,
    app,
    canonicalize,
    compress_to_max,
    contraction_closure,
    empty,
    f_of,
    leaf,
    print_blueprint,
    relative_depth,
    width,
)
from .combinators import CombDerivation, extract_combinator
from .compact import lambda_prefix
from .formula import Formula, Imp, formula_sort_key, print_formula, subformulas
from .oracle import SearchBound, Inhabited as OracleInhabited, bounded_decide, _merges, _rerank_free
from .terms import (
    Address,
    App,
    Lam,
    Term,
    Var,
    VarRef,
    addresses,
    alpha_canonical,
    free_vars,
    is_nf_inhabitant,
    print_term,
    type_of,
)
from .blueprint import blueprint_of


@dataclass(frozen=True)
class ShadowLabel:
    chi_seq: tuple[Formula, ...]
    gamma: Blueprint
    psi: Formula


@dataclass(frozen=True)
class Shadow:
    entries: tuple[tuple[Address, ShadowLabel], ...]

    def __post_init__(self) -> None:
        if list(self.entries) != sorted(self.entries, key=lambda e: e[0]):
            raise ValueError("shadow entries must be address-sorted")

    @property
    def domain(self) -> tuple[Address, ...]:
        return tuple(a for a, _ in self.entries)

    def get(self, a: Address) -> ShadowLabel:
        for addr, label in self.entries:
            if addr == a:
                return label
        raise KeyError(a)

    def arity(self, a: Address) -> int:
        dom = set(self.domain)
        return (a + (1,) in dom) + (a + (2,) in dom)

    def unary_count(self, a: Address) -> int:
        """k_a: the number of unary strict ancestors of a."""
        dom = set(self.domain)
        k = 0
        for i in range(len(a)):
            b = a[:i]
            if b + (1,) in dom and b + (2,) not in dom:
                k += 1
        return k

    def leaves(self) -> list[Address]:
        dom = set(self.domain)
        return sorted(a for a in dom if a + (1,) not in dom and a + (2,) not in dom)


def make_shadow(mapping: dict[Address, ShadowLabel]) -> Shadow:
    return Shadow(tuple(sorted(mapping.items(), key=lambda e: e[0])))


def root_shadow(phi: Formula) -> Shadow:
    return make_shadow({(): ShadowLabel((), empty(), phi)})


# --- comb witnesses ---------------------------------------------------------

def _comb(chi: tuple[Formula, ...], tags: tuple[Formula, ...]) -> Blueprint:
    """Right-leaf comb realizing exactly chi: F = contractions of {chi}."""
    if not chi:
        return empty()
    out = leaf(chi[0])
    for c, t in zip(chi[1:], tags):
        out = app(t, out, leaf(c))
    return out


def _comb_universe(
    chi: tuple[Formula, ...], pattern: tuple[int, ...]
) -> frozenset[tuple[Formula, ...]]:
    """Union of F over the graft closure of a comb whose spine tags follow the
    given equality pattern. Grafts on a comb cut the infix between two equal
    spine tags, so the closure is computed on (leaves, tag classes) pairs."""
    seen = {(chi, pattern)}
    frontier = [(chi, pattern)]
    while frontier:
        leaves, tags = frontier.pop()
        for i in range(len(tags)):
            for j in range(i + 1, len(tags)):
                if tags[i] != tags[j]:
                    continue
                nxt = (leaves[: i + 1] + leaves[j + 1 :], tags[: i + 1] + tags[j + 1 :])
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return contraction_closure(frozenset(l for l, _ in seen))


def _patterns(length: int, max_classes: int):
    """Restricted-growth strings with a bounded number of classes."""

    def go(prefix: list[int], used: int):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for c in range(min(used + 1, max_classes)):
            prefix.append(c)
            yield from go(prefix, max(used, c + 1))
            prefix.pop()

    yield from go([], 0)


@dataclass
class _Feasibility:
    gamma: Blueprint | None
    exact: bool


def _feasible_gamma(
    chi: tuple[Formula, ...],
    constraints: frozenset[tuple[Formula, ...]],
    subs: list[Formula],
    pattern_cap: int,
) -> _Feasibility:
    """Some blueprint gamma with chi in F(gamma), labels over the signature of
    subs, and no constraint sequence in the union of F over gamma's graft
    closure; None if provably impossible (exact) or not found (inexact)."""
    n = len(chi)
    if constraints & contraction_closure(frozenset({chi})):
        # every admissible gamma has F containing all contractions of chi
        return _Feasibility(None, True)
    s = len(subs)
    if n - 1 <= s:
        tags = tuple(subs[: max(0, n - 1)])
        return _Feasibility(canonicalize(_comb(chi, tags)), True)
    count = 0
    for pattern in _patterns(n - 1, s):
        count += 1
        if count > pattern_cap:
            return _Feasibility(None, False)
        if not (_comb_universe(chi, pattern) & constraints):
            tags = tuple(subs[c] for c in pattern)
            return _Feasibility(canonicalize(_comb(chi, tags)), True)
    return _Feasibility(None, False)


def _witness_gamma(chi: tuple[Formula, ...], subs: list[Formula]) -> Blueprint:
    """Unconstrained comb witness for a fresh leaf node."""
    n = len(chi)
    if n <= 1:
        return canonicalize(_comb(chi, ()))
    tags = tuple(subs[i % len(subs)] for i in range(n - 1))
    return canonicalize(_comb(chi, tags))


# --- shadow of a term -------------------------------------------------------

def shadow_of(m: Term, phi: Formula) -> Shadow:
    """The shadow of a locally compact inhabitant: at each address the free
    type sequence, a maximal bounded compression of the stable part, and the
    subterm type."""
    mapping: dict[Address, ShadowLabel] = {}
    for a, t in addresses(m):
        k = len(lambda_prefix(m, a))
        chi = tuple(v.var_type for v in free_vars(t))
        gamma = compress_to_max(blueprint_of(t), k)
        mapping[a] = ShadowLabel(chi, gamma, type_of(t))
    return make_shadow(mapping)


def is_phi_shadow(x: Shadow, phi: Formula) -> bool:
    dom = set(x.domain)
    if () not in dom:
        return False
    for a in dom:
        if a and a[:-1] not in dom:
            return False
        if a and a[-1] not in (1, 2):
            return False
        if a + (2,) in dom and a + (1,) not in dom:
            return False
    subs = subformulas(phi)
    bound = len(subs)
    root = x.get(())
    if root.chi_seq != () or not root.gamma.is_empty() or root.psi != phi:
        return False
    for a, label in x.entries:
        k = x.unary_count(a)
        if label.psi not in subs:
            return False
        if len(label.chi_seq) > k or any(c not in subs for c in label.chi_seq):
            return False
        g = label.gamma
        if g != canonicalize(g):
            return False
        for _, lab in g.entries:
            if (lab.formula if isinstance(lab, Leaf) else lab.formula) not in subs:
                return False
        if width(g) > k or relative_depth(g) > k * bound:
            return False
        if label.chi_seq not in f_of(g):
            return False
    return True


def is_compact_shadow(x: Shadow) -> bool:
    dom = x.domain
    for a in dom:
        la = x.get(a)
        for b in dom:
            if not (len(a) < len(b) and b[: len(a)] == a):
                continue
            lb = x.get(b)
            if x.arity(a) != x.arity(b) or la.psi != lb.psi:
                continue
            if admits_sequence(lb.gamma, la.chi_seq):
                return False
    return True


# --- compact-shadow enumeration ---------------------------------------------

@dataclass(frozen=True)
class Caps:
    max_shadows: int = 200_000
    max_shadow_nodes: int = 40
    max_label_candidates: int = 20_000


@dataclass
class Enumeration:
    shadows: list[Shadow]
    complete: bool
    exact: bool
    stats: dict[str, int] = field(default_factory=dict)


def _chi_splits(chi: tuple[Formula, ...]):
    """All (chi_left, chi_right) a binary node can induce: each position of
    chi goes left, right or both; the rightmost used left position must be
    covered on the right as well (the HRM application condition)."""
    r = len(chi)
    out: list[tuple[tuple[Formula, ...], tuple[Formula, ...]]] = []
    seen: set[tuple[tuple[Formula, ...], tuple[Formula, ...]]] = set()
    for assign in itertools.product("LRB", repeat=r):
        left_pos = [i for i in range(r) if assign[i] in "LB"]
        right_pos = [i for i in range(r) if assign[i] in "RB"]
        if left_pos and (not right_pos or left_pos[-1] > right_pos[-1]):
            continue
        pair = (
            tuple(chi[i] for i in left_pos),
            tuple(chi[i] for i in right_pos),
        )
        if pair not in seen:
            seen.add(pair)
            out.append(pair)
    return out


def enumerate_compact_shadows(phi: Formula, caps: Caps = Caps()) -> Enumeration:
    """All fully expanded compact phi-shadows: every leaf is a variable node
    (chi = (psi,)) and every edge labeling is consistent with some normal HRM
    term skeleton.

    Subtrees are enumerated once per (chi, psi, binder-count, ancestor label
    history) key, so sibling subtrees never multiply the search state.
    `complete` is False when a cap stopped the closure; `exact` is False when
    some pruning step could not be decided exactly (then an Empty verdict
    downstream must degrade)."""
    subs = sorted(subformulas(phi), key=formula_sort_key)
    state = {"complete": True, "exact": True, "expanded": 0, "emitted": 0}
    memo: dict[tuple, tuple[dict[Address, ShadowLabel], ...]] = {}

    def feasible(chi, arity, psi, hist) -> Blueprint | None:
        constraints = frozenset(c for ar, ps, c in hist if ar == arity and ps == psi)
        f = _feasible_gamma(chi, constraints, subs, caps.max_label_candidates)
        if f.gamma is None and not f.exact:
            state["exact"] = False
        return f.gamma

    def rec(
        chi: tuple[Formula, ...],
        psi: Formula,
        k: int,
        hist: frozenset,
        depth: int,
        fn_position: bool,
    ) -> tuple[dict[Address, ShadowLabel], ...]:
        key = (chi, psi, k, hist, fn_position)
        if key in memo:
            return memo[key]
        if depth > caps.max_shadow_nodes:
            state["complete"] = False
            return ()
        state["expanded"] += 1
        out: list[dict[Address, ShadowLabel]] = []
        if chi == (psi,):
            out.append({(): ShadowLabel(chi, _witness_gamma(chi, subs), psi)})
        if isinstance(psi, Imp) and len(chi) < k + 1 and not fn_position:
            g = feasible(chi, 1, psi, hist)
            if g is not None:
                child_hist = hist | {(1, psi, chi)}
                for sub in rec(
                    chi + (psi.antecedent,), psi.consequent, k + 1, child_hist, depth + 1, False
                ):
                    m = {(): ShadowLabel(chi, g, psi)}
                    m.update({(1,) + a: lb for a, lb in sub.items()})
                    out.append(m)
        g2 = feasible(chi, 2, psi, hist)
        if g2 is not None:
            child_hist = hist | {(2, psi, chi)}
            for psi2 in subs:
                fn_type = Imp(psi2, psi)
                if fn_type not in subs:
                    continue
                for chi1, chi2 in _chi_splits(chi):
                    lefts = rec(chi1, fn_type, k, child_hist, depth + 1, True)
                    if not lefts:
                        continue
                    rights = rec(chi2, psi2, k, child_hist, depth + 1, False)
                    for s1 in lefts:
                        for s2 in rights:
                            m = {(): ShadowLabel(chi, g2, psi)}
                            m.update({(1,) + a: lb for a, lb in s1.items()})
                            m.update({(2,) + a: lb for a, lb in s2.items()})
                            out.append(m)
        state["emitted"] += len(out)
        if state["emitted"] > caps.max_shadows:
            state["complete"] = False
            out = out[: max(0, caps.max_shadows - (state["emitted"] - len(out)))]
        result = tuple(out)
        if len(memo) < caps.max_shadows:
            memo[key] = result
        return result

    mappings = rec((), phi, 0, frozenset(), 0, False)
    shadows = sorted(
        {make_shadow(dict(m)) for m in mappings},
        key=lambda s: (len(s.domain), s.domain),
    )
    return Enumeration(
        shadows,
        state["complete"],
        state["exact"],
        {"shadows": len(shadows), "expanded": state["expanded"]},
    )


def _chi_split_positions(chi: tuple[Formula, ...]):
    """Like _chi_splits but with the 1-based positions of each side in the
    merged sequence, as needed to rebuild an application term."""
    r = len(chi)
    out = []
    seen = set()
    for assign in itertools.product("LRB", repeat=r):
        pos1 = tuple(i + 1 for i in range(r) if assign[i] in "LB")
        pos2 = tuple(i + 1 for i in range(r) if assign[i] in "RB")
        if set(pos1) | set(pos2) != set(range(1, r + 1)):
            continue
        if pos1 and (not pos2 or pos1[-1] > pos2[-1]):
            continue
        key = (pos1, pos2)
        if key in seen:
            continue
        seen.add(key)
        out.append(
            (
                tuple(chi[p - 1] for p in pos1),
                pos1,
                tuple(chi[p - 1] for p in pos2),
                pos2,
            )
        )
    return out


@dataclass
class _Solver:
    """Exhaustive search for inhabitants whose shadows are compact.

    Constraints are path-local: a node is constrained only by the (arity,
    psi, chi) labels of its ancestors, so sibling subtrees are independent
    and results memoize on (chi, psi, k, history)."""

    phi: Formula
    caps: Caps
    subs: list[Formula] = field(default_factory=list)
    memo: dict = field(default_factory=dict)
    complete: bool = True
    exact: bool = True
    expanded: int = 0

    def __post_init__(self) -> None:
        self.subs = sorted(subformulas(self.phi), key=formula_sort_key)

    def solve(self) -> tuple[Term, ...]:
        return self.sols((), self.phi, 0, frozenset(), 0, False)

    def sols(
        self,
        chi: tuple[Formula, ...],
        psi: Formula,
        k: int,
        hist: frozenset,
        depth: int,
        fn_position: bool,
    ) -> tuple[Term, ...]:
        """All normal HRM terms t with type psi, free types exactly chi at
        ranks 1..|chi|, whose subtree shadow extends the given ancestor
        history without breaking compactness. A function-position subterm is
        never an abstraction (the term would have a redex), so that branch is
        skipped outright there."""
        key = (chi, psi, k, hist, fn_position)
        if key in self.memo:
            return self.memo[key]
        if depth > self.caps.max_shadow_nodes:
            self.complete = False
            return ()
        self.expanded += 1
        out: list[Term] = []
        if chi == (psi,):
            out.append(Var(VarRef(1, psi)))
        if isinstance(psi, Imp) and len(chi) < k + 1 and not fn_position:
            feas = self._feasible(chi, 1, psi, hist)
            if feas:
                child_hist = hist | {(1, psi, chi)}
                binder = VarRef(len(chi) + 1, psi.antecedent)
                for t in self.sols(
                    chi + (psi.antecedent,), psi.consequent, k + 1, child_hist,
                    depth + 1, False,
                ):
                    out.append(Lam(binder, t))
        feas2 = self._feasible(chi, 2, psi, hist)
        if feas2:
            child_hist = hist | {(2, psi, chi)}
            r = len(chi)
            for psi2 in self.subs:
                fn_type = Imp(psi2, psi)
                if fn_type not in self.subs:
                    continue
                for chi1, pos1, chi2, pos2 in _chi_split_positions(chi):
                    sols1 = self.sols(chi1, fn_type, k, child_hist, depth + 1, True)
                    if not sols1:
                        continue
                    sols2 = self.sols(chi2, psi2, k, child_hist, depth + 1, False)
                    for t1 in sols1:
                        for t2 in sols2:
                            left = _rerank_free(t1, chi1, pos1, r)
                            lb = {ref.rank for ref in _bounds(left)}
                            right = _rerank_free(t2, chi2, pos2, r + len(lb))
                            out.append(alpha_canonical(App(left, right)))
        from .terms import node_count

        result = tuple(
            sorted(set(out), key=lambda t: (node_count(t), print_term(t)))
        )
        if len(self.memo) < self.caps.max_shadows:
            self.memo[key] = result
        else:
            self.complete = False
        return result

    def _feasible(
        self, chi: tuple[Formula, ...], arity: int, psi: Formula, hist: frozenset
    ) -> bool:
        constraints = frozenset(c for (r, p, c) in hist if r == arity and p == psi)
        feas = _feasible_gamma(chi, constraints, self.subs, self.caps.max_label_candidates)
        if feas.gamma is None and not feas.exact:
            self.exact = False
        return feas.gamma is not None


def _is_closed_shadow(x: Shadow) -> bool:
    """Every leaf can stand for a variable: chi = (psi)."""
    return all(x.get(a).chi_seq == (x.get(a).psi,) for a in x.leaves())


# --- per-domain inhabitant search -------------------------------------------

def _domain_search(
    phi: Formula,
    domain: tuple[Address, ...],
    psi_pin: dict[Address, Formula] | None,
) -> Term | None:
    """First closed normal HRM inhabitant of phi with the given tree domain,
    node kinds forced by arity, types within Sub(phi) (pinned per address when
    psi_pin is given)."""
    subs = sorted(subformulas(phi), key=formula_sort_key)
    dom = set(domain)

    def states(a: Address) -> list[tuple[Term, Formula, tuple[Formula, ...]]]:
        kids = [i for i in (1, 2) if a + (i,) in dom]
        if not kids:
            types = [psi_pin[a]] if psi_pin else subs
            return [(Var(VarRef(1, tau)), tau, (tau,)) for tau in types]
        if kids == [1]:
            out = []
            for term, tau, ftypes in states(a + (1,)):
                if not ftypes:
                    continue
                lam_type = Imp(ftypes[-1], tau)
                if lam_type not in subs:
                    continue
                if psi_pin and psi_pin[a] != lam_type:
                    continue
                binder = VarRef(len(ftypes), ftypes[-1])
                out.append((Lam(binder, term), lam_type, ftypes[:-1]))
            return out
        # binary node: the function child must not be an abstraction
        if a + (1, 1) in dom and a + (1, 2) not in dom:
            return []
        out = []
        dedup: set[Term] = set()
        for t1, tau1, f1 in states(a + (1,)):
            if not isinstance(tau1, Imp):
                continue
            for t2, tau2, f2 in states(a + (2,)):
                if tau2 != tau1.antecedent:
                    continue
                if psi_pin and psi_pin[a] != tau1.consequent:
                    continue
                for r, pa, pb in _merges(f1, f2):
                    if f1 and (not f2 or pa[-1] > pb[-1]):
                        continue
                    left = _rerank_free(t1, f1, pa, r)
                    lb = {ref.rank for ref in _bounds(left)}
                    right = _rerank_free(t2, f2, pb, r + len(lb))
                    term = alpha_canonical(App(left, right))
                    if term in dedup:
                        continue
                    dedup.add(term)
                    merged: list[Formula] = [None] * r  # type: ignore[list-item]
                    for i, p in enumerate(pa):
                        merged[p - 1] = f1[i]
                    for i, p in enumerate(pb):
                        merged[p - 1] = f2[i]
                    out.append((term, tau1.consequent, tuple(merged)))
        return out

    hits = [
        term
        for term, tau, ftypes in states(())
        if tau == phi and not ftypes and is_nf_inhabitant(alpha_canonical(term), phi)
    ]
    if not hits:
        return None
    return sorted((alpha_canonical(t) for t in hits), key=print_term)[0]


def _bounds(m: Term):
    from .terms import bound_refs

    return bound_refs(m)


def inhabitant_with_domain(phi: Formula, x: Shadow) -> Term | None:
    """First inhabitant with the shadow's tree domain, types pinned to the
    shadow's psi labels."""
    pins = {a: x.get(a).psi for a in x.domain}
    return _domain_search(phi, x.domain, pins)


# --- the decision procedure -------------------------------------------------

@dataclass(frozen=True)
class DecideConfig:
    engine: str = "auto"
    max_nodes: int = 10
    caps: Caps = field(default_factory=Caps)

    def __post_init__(self) -> None:
        if self.engine not in ("auto", "bounded", "shadow"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")


@dataclass
class Decision:
    verdict: str  # Inhabited | Empty | ResourceExhausted
    witness_lambda: Term | None
    witness_combinator: CombDerivation | None
    stats: dict[str, Any]


def _inhabited(witness: Term, phi: Formula, stats: dict[str, Any]) -> Decision:
    witness = alpha_canonical(witness)
    cert = extract_combinator(witness, phi)
    return Decision("Inhabited", witness, cert, stats)


def _decide_bounded(phi: Formula, config: DecideConfig) -> Decision:
    res = bounded_decide(phi, SearchBound(max_nodes=config.max_nodes))
    stats: dict[str, Any] = {"engine": "bounded", "max_nodes": config.max_nodes}
    if isinstance(res, OracleInhabited):
        return _inhabited(res.witness, phi, stats)
    return Decision("ResourceExhausted", None, None, stats)


def _decide_shadow(phi: Formula, config: DecideConfig) -> Decision:
    solver = _Solver(phi, config.caps)
    witnesses = solver.solve()
    stats: dict[str, Any] = {
        "engine": "shadow",
        "expanded": solver.expanded,
        "memo_entries": len(solver.memo),
        "witnesses": len(witnesses),
        "closure_complete": solver.complete,
        "closure_exact": solver.exact,
    }
    if witnesses:
        return _inhabited(witnesses[0], phi, stats)
    if solver.complete and solver.exact:
        return Decision("Empty", None, None, stats)
    return Decision("ResourceExhausted", None, None, stats)


def decide(phi: Formula, config: DecideConfig = DecideConfig()) -> Decision:
    """Decide inhabitation of phi. Inhabited verdicts always carry a checked
    lambda witness and a combinator certificate; Empty is only claimed by the
    complete shadow engine with no caps tripped."""
    t0 = time.monotonic()
    if config.engine == "bounded":
        out = _decide_bounded(phi, config)
    elif config.engine == "shadow":
        out = _decide_shadow(phi, config)
    else:
        out = _decide_bounded(phi, config)
        if out.verdict != "Inhabited":
            out = _decide_shadow(phi, config)
    out.stats["wall_time"] = time.monotonic() - t0
    return out
