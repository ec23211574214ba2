"""``bondedkb`` command line: ``eval``, ``ingest`` and ``verify``.

Exit codes: 0 success, 2 parse/usage error, 3 validation error, 4 internal
consistency or invariance failure, 5 no generic projection found.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from . import engine
from .diagram import DiagramError, ParseError, ValidationError, parse_diagram, serialize_diagram, validate
from .ingest import GenericityError, ProjectionConfig, close_chain, load_structure, project
from .laurent import Coefficient, IntLaurent
from .moves import MOVES, random_moves

EXIT_PARSE, EXIT_INVALID, EXIT_INTERNAL, EXIT_GENERICITY = 2, 3, 4, 5


def _read_diagram(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    d = parse_diagram(text)
    bad = validate(d)
    if bad:
        raise ValidationError(bad)
    return d


def _emit(value, fmt: str) -> None:
    print(value.to_json() if fmt == "json" else value.to_text())


def run_eval(args) -> int:
    d = _read_diagram(args.input)
    opts = engine.EvaluationOptions(mode=args.mode, parallel=args.parallel)
    if args.reduced:
        _emit(engine.reduced_polynomial(d, opts), args.format)
    elif args.normalized:
        _emit(engine.normalized_value(d, args.mode, opts), args.format)
    elif args.mode == "topological":
        _emit(engine.evaluate_topological(d, opts).value, args.format)
    else:
        _emit(engine.evaluate_framed(d, opts).value, args.format)
    return 0


def run_ingest(args) -> int:
    fmt = args.format
    s = load_structure(args.input, fmt=fmt, chain=args.chain)
    s = close_chain(s)
    d = project(s, ProjectionConfig(seed=args.seed))
    Path(args.output).write_text(serialize_diagram(d) + "\n")
    print(f"crossings: {len(d.crossings)} bonds: {d.bond_count}")
    return 0


def _kink_factor(log) -> Coefficient:
    """Net framing factor ``(-A^3)^k`` accumulated by the curls in a move log."""
    k = 0
    for site in log:
        if site.move in ("I+", "I-"):
            step = 1 if site.move == "I+" else -1
            k += -step if site.inverse else step
    return Coefficient(IntLaurent.monomial(3 * k, -1 if k % 2 else 1))


def run_verify(args) -> int:
    d = _read_diagram(args.input)
    moves = MOVES if args.mode == "topological" else tuple(m for m in MOVES if m != "V")
    after = random_moves(d, args.moves, args.seed, moves=moves, max_crossings=args.max_crossings)
    log = after.meta["moves"]
    counts = Counter(str(s.move) + ("^-1" if s.inverse else "") for s in log)
    print(f"moves applied: {len(log)} " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    ok = True
    n0 = engine.normalized_value(d, args.mode)
    n1 = engine.normalized_value(after, args.mode)
    line = "PASS" if n0 == n1 else "FAIL"
    ok &= n0 == n1
    print(f"{line} normalized {args.mode} value invariant")
    if args.mode == "framed":
        v0 = engine.evaluate_framed(d).value
        v1 = engine.evaluate_framed(after).value
        good = v1 == v0.scale(_kink_factor(log))
        ok &= good
        print(f"{'PASS' if good else 'FAIL'} framed value changes only by the curl factor")
    return 0 if ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bondedkb", description="Bonded Kauffman bracket skein module tools")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a diagram")
    e.add_argument("--input", required=True)
    e.add_argument("--mode", choices=("framed", "topological"), default="framed")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--normalized", action="store_true")
    g.add_argument("--reduced", action="store_true")
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.add_argument("--parallel", action="store_true")
    e.set_defaults(func=run_eval)

    i = sub.add_parser("ingest", help="project a 3D structure to a diagram")
    i.add_argument("--input", required=True)
    i.add_argument("--format", choices=("auto", "json", "pdb"), default="auto")
    i.add_argument("--chain")
    i.add_argument("--closure", choices=("direct",), default="direct")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--output", required=True)
    i.set_defaults(func=run_ingest)

    v = sub.add_parser("verify", help="check invariance under random moves")
    v.add_argument("--input", required=True)
    v.add_argument("--moves", type=int, required=True)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--mode", choices=("framed", "topological"), default="framed")
    v.add_argument("--max-crossings", type=int, default=10, help=argparse.SUPPRESS)
    v.set_defaults(func=run_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and args.reduced and args.mode != "framed":
        parser.error("--reduced applies to the framed mode only")
    if args.command == "verify" and args.moves < 0:
        parser.error("--moves must be nonnegative")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GenericityError as exc:
        print(f"genericity error: {exc}", file=sys.stderr)
        return EXIT_GENERICITY
    except (DiagramError, ArithmeticError, ValueError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
