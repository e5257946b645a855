"""Implicational formulas: data type, parser, printer, subformula machinery.

The only connective is the arrow. Atom identity is by name string; there is
no unification and no atom schemata anywhere in this package.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import re


class FormulaSyntaxError(ValueError):
    """Malformed formula text; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self) -> None:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", self.name):
            raise ValueError(f"bad atom name: {self.name!r}")

    def __repr__(self) -> str:
        return f"Atom({self.name})"


@dataclass(frozen=True)
class Imp:
    antecedent: "Formula"
    consequent: "Formula"

    def __repr__(self) -> str:
        return f"Imp({self.antecedent!r}, {self.consequent!r})"


Formula = Atom | Imp


_TOKEN = re.compile(r"\s*(->|\(|\)|[A-Za-z][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            # trailing whitespace is fine, anything else is not
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[bad]!r}", bad)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


def parse_formula(text: str) -> Formula:
    """Parse `F ::= atom | F "->" F | "(" F ")"` with right-associative arrow."""
    tokens = _tokenize(text)
    index = 0

    def peek() -> tuple[str, int] | None:
        return tokens[index] if index < len(tokens) else None

    def advance() -> tuple[str, int]:
        nonlocal index
        tok = peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", len(text))
        index += 1
        return tok

    def parse_arrow() -> Formula:
        left = parse_primary()
        tok = peek()
        if tok is not None and tok[0] == "->":
            advance()
            return Imp(left, parse_arrow())
        return left

    def parse_primary() -> Formula:
        tok = advance()
        text_, offset = tok
        if text_ == "(":
            inner = parse_arrow()
            closing = advance()
            if closing[0] != ")":
                raise FormulaSyntaxError("expected ')'", closing[1])
            return inner
        if text_ in ("->", ")"):
            raise FormulaSyntaxError(f"unexpected {text_!r}", offset)
        return Atom(text_)

    result = parse_arrow()
    trailing = peek()
    if trailing is not None:
        raise FormulaSyntaxError(f"trailing input {trailing[0]!r}", trailing[1])
    return result


def print_formula(f: Formula) -> str:
    """Minimal-parentheses printing, arrow right-associative."""
    if isinstance(f, Atom):
        return f.name
    left = print_formula(f.antecedent)
    if isinstance(f.antecedent, Imp):
        left = f"({left})"
    return f"{left}->{print_formula(f.consequent)}"


@lru_cache(maxsize=None)
def subformulas(f: Formula) -> frozenset[Formula]:
    if isinstance(f, Atom):
        return frozenset({f})
    return subformulas(f.antecedent) | subformulas(f.consequent) | {f}


@dataclass(frozen=True)
class Signature:
    leaf_formulas: frozenset[Formula]
    app_tags: frozenset[Formula]


def signature_of(f: Formula) -> Signature:
    subs = subformulas(f)
    return Signature(leaf_formulas=subs, app_tags=subs)


def formula_sort_key(f: Formula) -> str:
    """Deterministic total order on formulas, used wherever sets get serialized."""
    return print_formula(f)
