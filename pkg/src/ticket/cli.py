"""Command-line front end.

Subcommands:
  decide FORMULA   decide inhabitation; exit 0 Inhabited, 1 Empty,
                   3 ResourceExhausted, 2 parse/config error
  check CERT.json FORMULA
                   verify a combinator certificate against a formula;
                   exit 0 valid, 1 invalid, 2 malformed input
  corpus FILE      decide every formula in FILE (one per line); with the
                   auto engine the bounded and shadow verdicts are cross
                   checked; exit 0 iff no disagreement, 2 on bad input

JSON output is deterministic: identical input and configuration produce
byte-identical bytes (wall-clock time is reported only in text mode).
"""
from __future__ import annotations

import argparse
import json
import signal
import sys

from .combinators import (
    CertificateError,
    check_derivation,
    derivation_from_json,
    derivation_to_json,
)
from .formula import FormulaSyntaxError, parse_formula, print_formula
from .shadow import Caps, DecideConfig, Decision, decide
from .terms import print_term

EXIT_INHABITED = 0
EXIT_EMPTY = 1
EXIT_ERROR = 2
EXIT_EXHAUSTED = 3

_VERDICT_EXIT = {
    "Inhabited": EXIT_INHABITED,
    "Empty": EXIT_EMPTY,
    "ResourceExhausted": EXIT_EXHAUSTED,
}


class _Budget(Exception):
    pass


def _alarm(signum, frame):
    raise _Budget()


def _decide_with_budget(phi, config: DecideConfig, seconds: int | None) -> Decision:
    if seconds is None or not hasattr(signal, "SIGALRM"):
        return decide(phi, config)
    old = signal.signal(signal.SIGALRM, _alarm)
    signal.alarm(seconds)
    try:
        return decide(phi, config)
    except _Budget:
        return Decision(
            "ResourceExhausted", None, None, {"engine": config.engine, "time_budget_hit": True}
        )
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, old)


def _config_from(args) -> DecideConfig:
    caps = Caps(max_shadows=args.max_shadows)
    return DecideConfig(engine=args.engine, max_nodes=args.max_nodes, caps=caps)


def _decision_payload(phi, d: Decision, config: DecideConfig, emit: str) -> dict:
    stats = {k: v for k, v in d.stats.items() if k != "wall_time"}
    return {
        "formula": print_formula(phi),
        "verdict": d.verdict,
        "witness_lambda": (
            print_term(d.witness_lambda)
            if d.witness_lambda is not None and emit in ("lambda", "both")
            else None
        ),
        "witness_combinator": (
            derivation_to_json(d.witness_combinator)
            if d.witness_combinator is not None and emit in ("combinator", "both")
            else None
        ),
        "stats": stats,
        "caps": {
            "engine": config.engine,
            "max_nodes": config.max_nodes,
            "max_shadows": config.caps.max_shadows,
            "max_shadow_nodes": config.caps.max_shadow_nodes,
            "max_label_candidates": config.caps.max_label_candidates,
        },
    }


def _print_decision_text(phi, d: Decision, emit: str, trace: bool) -> None:
    print(f"{print_formula(phi)}: {d.verdict}")
    if d.witness_lambda is not None and emit in ("lambda", "both"):
        print(f"  witness: {print_term(d.witness_lambda)}")
    if d.witness_combinator is not None and emit in ("combinator", "both"):
        print(f"  certificate: {json.dumps(derivation_to_json(d.witness_combinator))}")
    if trace:
        for k in sorted(d.stats):
            print(f"  # {k} = {d.stats[k]}", file=sys.stderr)


def cmd_decide(args) -> int:
    try:
        phi = parse_formula(args.formula)
        config = _config_from(args)
    except (FormulaSyntaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    d = _decide_with_budget(phi, config, args.time_budget)
    if args.json:
        payload = _decision_payload(phi, d, config, args.emit)
        sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        _print_decision_text(phi, d, args.emit, args.trace)
    return _VERDICT_EXIT[d.verdict]


def cmd_check(args) -> int:
    try:
        phi = parse_formula(args.formula)
    except FormulaSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        with open(args.certificate, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        derivation = derivation_from_json(data)
        derived = check_derivation(derivation)
    except CertificateError as exc:
        print(f"invalid certificate: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    if derived != phi:
        print(
            f"invalid certificate: derives {print_formula(derived)}, "
            f"expected {print_formula(phi)}",
            file=sys.stderr,
        )
        return EXIT_EMPTY
    print(f"valid certificate for {print_formula(phi)}")
    return EXIT_INHABITED


def cmd_corpus(args) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    formulas = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            formulas.append((lineno, parse_formula(text)))
        except FormulaSyntaxError as exc:
            print(f"error: line {lineno}: {exc}", file=sys.stderr)
            return EXIT_ERROR

    try:
        caps = Caps(max_shadows=args.max_shadows)
        engines = (
            ["bounded", "shadow"] if args.engine == "auto" else [args.engine]
        )
        configs = {
            name: DecideConfig(engine=name, max_nodes=args.max_nodes, caps=caps)
            for name in engines
        }
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    disagreements = 0
    for _, phi in formulas:
        verdicts = {
            name: _decide_with_budget(phi, cfg, args.time_budget).verdict
            for name, cfg in configs.items()
        }
        # bounded never claims Empty, so the only hard conflict is
        # Inhabited on one engine against Empty on the other
        conflict = "Inhabited" in verdicts.values() and "Empty" in verdicts.values()
        disagreements += conflict
        cells = "  ".join(f"{name}={verdicts[name]}" for name in engines)
        flag = "  DISAGREE" if conflict else ""
        print(f"{print_formula(phi)}  {cells}{flag}")
    print(f"# {len(formulas)} formulas, {disagreements} disagreements")
    return EXIT_INHABITED if disagreements == 0 else EXIT_EMPTY


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=["auto", "bounded", "shadow"], default="auto")
    p.add_argument("--max-nodes", type=int, default=10)
    p.add_argument("--max-shadows", type=int, default=200_000)
    p.add_argument("--time-budget", type=int, default=None, metavar="SECONDS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ticket",
        description="Decide inhabitation of implicational formulas and "
        "verify combinator certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_decide = sub.add_parser("decide", help="decide one formula")
    p_decide.add_argument("formula")
    _add_engine_flags(p_decide)
    p_decide.add_argument("--json", action="store_true")
    p_decide.add_argument("--trace", action="store_true")
    p_decide.add_argument(
        "--emit", choices=["lambda", "combinator", "both"], default="both"
    )
    p_decide.set_defaults(func=cmd_decide)

    p_check = sub.add_parser("check", help="verify a certificate file")
    p_check.add_argument("certificate")
    p_check.add_argument("formula")
    p_check.set_defaults(func=cmd_check)

    p_corpus = sub.add_parser("corpus", help="decide a file of formulas")
    p_corpus.add_argument("file")
    _add_engine_flags(p_corpus)
    p_corpus.set_defaults(func=cmd_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize other codes
        return EXIT_ERROR if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
