"""BB'IW combinator derivations: checkable modus-ponens certificates,
translation to HRM lambda terms, and extraction of a certificate from any
normal inhabitant."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .formula import Formula, Imp, parse_formula, print_formula
from .terms import (
    App,
    Lam,
    PreconditionViolated,
    Term,
    Var,
    VarRef,
    free_vars,
    hrm_normalize,
    is_nf_inhabitant,
    type_of,
)

Path = tuple[int, ...]


class CertificateError(Exception):
    pass


class BadAxiomInstance(CertificateError):
    def __init__(self, path: Path, message: str = "not an instance of the axiom scheme"):
        super().__init__(f"{message} at path {path}")
        self.path = path


class BadModusPonens(CertificateError):
    def __init__(self, path: Path, message: str = "modus ponens types do not fit"):
        super().__init__(f"{message} at path {path}")
        self.path = path


class CertificateFormatError(CertificateError):
    pass


AXIOM_KINDS = ("B", "B'", "I", "W")


@dataclass(frozen=True)
class Axiom:
    kind: str
    instantiated_type: Formula


@dataclass(frozen=True)
class MP:
    left: "CombDerivation"
    right: "CombDerivation"
    result_type: Formula


CombDerivation = Axiom | MP


def _axiom_instance_ok(kind: str, t: Formula) -> bool:
    # B : (chi->psi)->((phi->chi)->(phi->psi))
    # B': (phi->chi)->((chi->psi)->(phi->psi))
    # I : phi->phi
    # W : (phi->(phi->chi))->(phi->chi)
    if kind == "I":
        return isinstance(t, Imp) and t.antecedent == t.consequent
    if not isinstance(t, Imp):
        return False
    a, c = t.antecedent, t.consequent
    if kind == "B":
        if not (isinstance(a, Imp) and isinstance(c, Imp)):
            return False
        chi, psi = a.antecedent, a.consequent
        ca, cc = c.antecedent, c.consequent
        if not (isinstance(ca, Imp) and isinstance(cc, Imp)):
            return False
        phi = ca.antecedent
        return ca.consequent == chi and cc.antecedent == phi and cc.consequent == psi
    if kind == "B'":
        if not (isinstance(a, Imp) and isinstance(c, Imp)):
            return False
        phi, chi = a.antecedent, a.consequent
        ca, cc = c.antecedent, c.consequent
        if not (isinstance(ca, Imp) and isinstance(cc, Imp)):
            return False
        return (
            ca.antecedent == chi
            and cc.antecedent == phi
            and cc.consequent == ca.consequent
        )
    if kind == "W":
        if not (isinstance(a, Imp) and isinstance(c, Imp)):
            return False
        phi = a.antecedent
        inner = a.consequent
        return (
            isinstance(inner, Imp)
            and inner.antecedent == phi
            and c.antecedent == phi
            and c.consequent == inner.consequent
        )
    return False


def check_derivation(d: CombDerivation) -> Formula:
    """Return the root type after verifying every axiom instance and every
    modus ponens step. Iterative so shared subtrees do not blow up."""
    types: dict[int, Formula] = {}
    stack: list[tuple[CombDerivation, Path, bool]] = [(d, (), False)]
    while stack:
        node, path, expanded = stack.pop()
        if id(node) in types:
            continue
        if isinstance(node, Axiom):
            if node.kind not in AXIOM_KINDS:
                raise BadAxiomInstance(path, f"unknown axiom kind {node.kind!r}")
            if not _axiom_instance_ok(node.kind, node.instantiated_type):
                raise BadAxiomInstance(path)
            types[id(node)] = node.instantiated_type
        elif not expanded:
            stack.append((node, path, True))
            stack.append((node.right, path + (2,), False))
            stack.append((node.left, path + (1,), False))
        else:
            lt = types[id(node.left)]
            rt = types[id(node.right)]
            if not (isinstance(lt, Imp) and lt.antecedent == rt):
                raise BadModusPonens(path)
            if lt.consequent != node.result_type:
                raise BadModusPonens(path, "annotated result type differs")
            types[id(node)] = node.result_type
    return types[id(d)]


def mp(left: CombDerivation, right: CombDerivation) -> MP:
    """Modus ponens with the result type computed from the annotations."""
    lt = _root_type(left)
    rt = _root_type(right)
    if not (isinstance(lt, Imp) and lt.antecedent == rt):
        raise BadModusPonens((), "cannot combine these two derivations")
    return MP(left, right, lt.consequent)


def _root_type(d: CombDerivation) -> Formula:
    return d.instantiated_type if isinstance(d, Axiom) else d.result_type


def axiom_b(chi: Formula, psi: Formula, phi: Formula) -> Axiom:
    return Axiom("B", Imp(Imp(chi, psi), Imp(Imp(phi, chi), Imp(phi, psi))))


def axiom_b_prime(phi: Formula, chi: Formula, psi: Formula) -> Axiom:
    return Axiom("B'", Imp(Imp(phi, chi), Imp(Imp(chi, psi), Imp(phi, psi))))


def axiom_i(phi: Formula) -> Axiom:
    return Axiom("I", Imp(phi, phi))


def axiom_w(phi: Formula, chi: Formula) -> Axiom:
    return Axiom("W", Imp(Imp(phi, Imp(phi, chi)), Imp(phi, chi)))


def _counterpart(leaf: Axiom, base: int) -> tuple[Term, int]:
    """Lambda counterpart of an axiom leaf, bound ranks base+1 upward."""
    t = leaf.instantiated_type
    assert isinstance(t, Imp)
    if leaf.kind == "I":
        x = VarRef(base + 1, t.antecedent)
        return Lam(x, Var(x)), base + 1
    if leaf.kind == "B":
        # \f:chi->psi. \g:phi->chi. \x:phi. f (g x)
        chi_psi = t.antecedent
        phi_chi = t.consequent.antecedent  # type: ignore[union-attr]
        phi = phi_chi.antecedent  # type: ignore[union-attr]
        f = VarRef(base + 1, chi_psi)
        g = VarRef(base + 2, phi_chi)
        x = VarRef(base + 3, phi)
        return Lam(f, Lam(g, Lam(x, App(Var(f), App(Var(g), Var(x)))))), base + 3
    if leaf.kind == "B'":
        # \f:phi->chi. \g:chi->psi. \x:phi. g (f x)
        phi_chi = t.antecedent
        chi_psi = t.consequent.antecedent  # type: ignore[union-attr]
        phi = phi_chi.antecedent  # type: ignore[union-attr]
        f = VarRef(base + 1, phi_chi)
        g = VarRef(base + 2, chi_psi)
        x = VarRef(base + 3, phi)
        return Lam(f, Lam(g, Lam(x, App(Var(g), App(Var(f), Var(x)))))), base + 3
    # W: \h:phi->(phi->chi). \x:phi. h x x
    h = VarRef(base + 1, t.antecedent)
    x = VarRef(base + 2, t.antecedent.antecedent)  # type: ignore[union-attr]
    return Lam(h, Lam(x, App(App(Var(h), Var(x)), Var(x)))), base + 2


def comb_to_lambda(d: CombDerivation) -> Term:
    """Translate a checked derivation to a normal inhabitant of its type."""
    phi = check_derivation(d)

    def build(node: CombDerivation, base: int) -> tuple[Term, int]:
        if isinstance(node, Axiom):
            return _counterpart(node, base)
        left, base = build(node.left, base)
        right, base = build(node.right, base)
        return App(left, right), base

    raw, _ = build(d, 0)
    result = hrm_normalize(raw)
    assert is_nf_inhabitant(result, phi)
    return result


def extend_derivation(d: CombDerivation, prefix: list[Formula]) -> CombDerivation:
    """From a derivation of chi->psi, derive (prefix->chi)->(prefix->psi)
    by left-applications of B, one per prefix element."""
    t = _root_type(d)
    if not isinstance(t, Imp):
        raise PreconditionViolated("extend_derivation needs an arrow-typed derivation")
    if not prefix:
        return d
    head, tail = prefix[0], list(prefix[1:])
    inner = extend_derivation(d, tail)
    it = _root_type(inner)
    assert isinstance(it, Imp)
    return mp(axiom_b(it.antecedent, it.consequent, head), inner)


def _peel(t: Formula, n: int) -> tuple[list[Formula], Formula]:
    parts: list[Formula] = []
    for _ in range(n):
        if not isinstance(t, Imp):
            raise PreconditionViolated("type too shallow for the given index sequence")
        parts.append(t.antecedent)
        t = t.consequent
    return parts, t


def apply_combine(
    d1: CombDerivation,
    d2: CombDerivation,
    i_seq: tuple[int, ...],
    j_seq: tuple[int, ...],
    k_seq: tuple[int, ...],
) -> CombDerivation:
    """Combine d1: w_i1..w_in -> (chi->psi) and d2: w_j1..w_jm -> chi into a
    derivation of w_k1..w_kp -> psi, where k enumerates {i} union {j}.

    Requires n = 0, or n,m > 0 with i_n <= j_m. The recursion uses B to push
    the combination under shared antecedents, B' to swap the two streams, and
    W to contract when the top antecedents coincide.
    """
    for seq in (i_seq, j_seq, k_seq):
        if any(seq[x] >= seq[x + 1] for x in range(len(seq) - 1)):
            raise PreconditionViolated("index sequences must be strictly increasing")
    if tuple(sorted(set(i_seq) | set(j_seq))) != k_seq:
        raise PreconditionViolated("k sequence must enumerate the union of i and j")
    if i_seq and not (j_seq and i_seq[-1] <= j_seq[-1]):
        raise PreconditionViolated("need n = 0 or i_n <= j_m")

    t1 = check_derivation(d1)
    t2 = check_derivation(d2)
    omega: dict[int, Formula] = {}

    def record(positions: tuple[int, ...], parts: list[Formula]) -> None:
        for pos, part in zip(positions, parts):
            if omega.setdefault(pos, part) != part:
                raise PreconditionViolated(f"conflicting formulas at shared position {pos}")

    parts1, rest1 = _peel(t1, len(i_seq))
    parts2, chi = _peel(t2, len(j_seq))
    record(i_seq, parts1)
    record(j_seq, parts2)
    if not (isinstance(rest1, Imp) and rest1.antecedent == chi):
        raise PreconditionViolated("d1 target is not (chi -> psi) for d2's chi")

    def combine(da, i, db, j):
        # da proves w_i -> (chi->psi); db proves w_j -> chi
        n, m = len(i), len(j)
        _, target = _peel(_root_type(da), n)
        assert isinstance(target, Imp)
        chi_, psi_ = target.antecedent, target.consequent
        if n == 0:
            if m == 0:
                return mp(da, db)
            w = omega[j[-1]]
            step = mp(axiom_b(chi_, psi_, w), da)
            if m == 1:
                return mp(step, db)
            return combine(step, (), db, j[:-1])
        if m > 1 and i[-1] <= j[-2]:
            w = omega[j[-1]]
            lifted = extend_derivation(axiom_b(chi_, psi_, w), [omega[p] for p in i])
            return combine(mp(lifted, da), i, db, j[:-1])
        # m == 1 or i[-1] > j[-2]: route through B', possibly contract with W
        w = omega[j[-1]]
        lifted = extend_derivation(axiom_b_prime(w, chi_, psi_), [omega[p] for p in j[:-1]])
        swapped = combine(mp(lifted, db), j[:-1], da, i)
        if j[-1] > i[-1]:
            return swapped
        # j_m = i_n: swapped proves w_k1..w_k(p-1) -> (w -> (w -> psi))
        shared = tuple(sorted(set(i) | set(j[:-1])))
        contraction = extend_derivation(axiom_w(w, psi_), [omega[p] for p in shared[:-1]])
        return mp(contraction, swapped)

    return combine(d1, i_seq, d2, j_seq)


def extract_combinator(m: Term, phi: Formula) -> CombDerivation:
    """Certificate extraction from a normal inhabitant: variables become I
    instances, abstractions are transparent (the derived formula already has
    the arrow shape), applications go through apply_combine with the index
    sequences given by the positions of each side's free variables within the
    merged free-variable sequence."""
    if not is_nf_inhabitant(m, phi):
        raise PreconditionViolated("extract_combinator needs a normal inhabitant")

    def extract(t: Term) -> CombDerivation:
        # invariant: returns a derivation of W(Free(t)) -> type_of(t)
        if isinstance(t, Var):
            return axiom_i(t.ref.var_type)
        if isinstance(t, Lam):
            return extract(t.body)
        left = extract(t.fn)
        right = extract(t.arg)
        fv_fn = [v.rank for v in free_vars(t.fn)]
        fv_arg = [v.rank for v in free_vars(t.arg)]
        merged = sorted(set(fv_fn) | set(fv_arg))
        pos = {rank: idx + 1 for idx, rank in enumerate(merged)}
        i_seq = tuple(pos[r] for r in fv_fn)
        j_seq = tuple(pos[r] for r in fv_arg)
        k_seq = tuple(pos[r] for r in merged)
        return apply_combine(left, right, i_seq, j_seq, k_seq)

    d = extract(m)
    result = check_derivation(d)
    assert result == phi, f"extracted {print_formula(result)}, wanted {print_formula(phi)}"
    return d


def derivation_to_json(d: CombDerivation) -> dict[str, Any]:
    if isinstance(d, Axiom):
        return {"kind": d.kind, "type": print_formula(d.instantiated_type)}
    return {
        "kind": "mp",
        "type": print_formula(d.result_type),
        "children": [derivation_to_json(d.left), derivation_to_json(d.right)],
    }


def derivation_from_json(data: Any) -> CombDerivation:
    if not isinstance(data, dict) or "kind" not in data or "type" not in data:
        raise CertificateFormatError("certificate nodes need 'kind' and 'type'")
    try:
        node_type = parse_formula(data["type"])
    except Exception as exc:
        raise CertificateFormatError(f"bad type string: {exc}") from exc
    kind = data["kind"]
    if kind == "mp":
        children = data.get("children")
        if not isinstance(children, list) or len(children) != 2:
            raise CertificateFormatError("mp node needs exactly two children")
        return MP(
            derivation_from_json(children[0]),
            derivation_from_json(children[1]),
            node_type,
        )
    if kind not in AXIOM_KINDS:
        raise CertificateFormatError(f"unknown node kind {kind!r}")
    return Axiom(kind, node_type)
