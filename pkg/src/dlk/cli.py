"""Command-line front end.

Exit codes: 0 all checks passed, 1 any diagnostic or failing case, 2 usage
errors.  All configuration is by flags; no environment variables are read.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import ast
from .checker import check_file
from .corpus import run_corpus
from .diagnostics import DiagnosticError
from .parser import ProofDecl, parse_file
from .render import render, render_type
from .theories import PACKS, load_theory


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _pack_list(text: str) -> tuple[str, ...]:
    packs = tuple(p.strip() for p in text.split(",") if p.strip())
    for p in packs:
        if p not in PACKS:
            raise argparse.ArgumentTypeError(f"unknown theory pack {p!r} (available: {', '.join(sorted(PACKS))})")
    return packs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlk", description="Proof-checking kernel for .dlp files")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check declarations and proofs in .dlp files")
    check.add_argument("files", nargs="+", metavar="FILE")
    check.add_argument("--theory", type=_pack_list, default=(), help="comma-separated packs: nat,sets,reals")
    check.add_argument("--json", action="store_true")
    check.add_argument("--fuel", type=_positive_int, default=10_000, help="evaluation step budget")
    check.add_argument("--admit-unsound-axiom", action="append", default=[], metavar="FORMULA")

    parse = sub.add_parser("parse", help="parse a .dlp file and report or dump its structure")
    parse.add_argument("file", metavar="FILE")
    parse.add_argument("--dump-ast", action="store_true")
    parse.add_argument("--json", action="store_true")

    axioms = sub.add_parser("axioms", help="list the axioms of a theory pack")
    axioms.add_argument("--theory", type=_pack_list, required=True)
    axioms.add_argument("--json", action="store_true")

    corpus = sub.add_parser("corpus", help="run the executable corpus")
    corpus.add_argument("--dir", default=None)
    corpus.add_argument("--json", action="store_true")
    corpus.add_argument("--admit-unsound-axiom", action="append", default=[], metavar="FORMULA")

    return parser


def _node_to_dict(node) -> object:
    if isinstance(node, ast.Node):
        out = {"node": type(node).__name__, "span": node.span.to_json()}
        for f in dataclasses.fields(node):
            if f.name == "span":
                continue
            v = getattr(node, f.name)
            if isinstance(v, ast.Node):
                out[f.name] = _node_to_dict(v)
            elif isinstance(v, tuple):
                out[f.name] = [_node_to_dict(item) for item in v]
            elif dataclasses.is_dataclass(v):
                out[f.name] = render_type(v)
            else:
                out[f.name] = v
        return out
    if isinstance(v := node, tuple):
        return [_node_to_dict(item) for item in v]
    return node


def cmd_check(args) -> int:
    results = [check_file(path, args.theory, tuple(args.admit_unsound_axiom)) for path in args.files]
    if args.json:
        status = "ok" if all(r.ok for r in results) else "error"
        print(json.dumps({"status": status, "cases": [r.to_json() for r in results]}, indent=2))
    else:
        for r in results:
            for name in r.verified:
                print(f"Verified: {name}")
            for d in r.diagnostics:
                print(f"{r.path}:{d.span}: {d}")
            if r.ok and not r.verified:
                print(f"{r.path}: ok (no proofs)")
    return 0 if all(r.ok for r in results) else 1


def cmd_parse(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    try:
        source = parse_file(text, args.file)
    except DiagnosticError as e:
        if args.json:
            print(json.dumps({"status": "error", "diagnostics": [e.diagnostic.to_json()]}, indent=2))
        else:
            print(f"{args.file}:{e.diagnostic.span}: {e.diagnostic}")
        return 1
    if args.json:
        decls = []
        for d in source.declarations:
            entry = {"kind": type(d).__name__, "span": d.span.to_json()}
            if hasattr(d, "name"):
                entry["name"] = d.name
            if args.dump_ast:
                if hasattr(d, "body"):
                    entry["body"] = _node_to_dict(d.body)
                if isinstance(d, ProofDecl):
                    entry["goal"] = _node_to_dict(d.goal)
                    entry["steps"] = [
                        {
                            "number": s.number,
                            "kind": s.kind,
                            "rule": s.rule,
                            "refs": list(s.refs),
                            "formula": _node_to_dict(s.formula),
                        }
                        for s in d.steps
                    ]
            decls.append(entry)
        print(json.dumps({"status": "ok", "path": args.file, "declarations": decls}, indent=2))
        return 0
    for d in source.declarations:
        name = getattr(d, "name", "")
        print(f"{d.span.line}:{d.span.column} {type(d).__name__} {name}".rstrip())
        if args.dump_ast:
            if hasattr(d, "body"):
                print(f"  body: {render(d.body)}")
            if isinstance(d, ProofDecl):
                print(f"  goal: {render(d.goal)}")
                for s in d.steps:
                    rule = f" by {s.rule}{list(s.refs)}" if s.rule else ""
                    print(f"  {s.number}. [{s.span.line}:{s.span.column}] {s.kind} {render(s.formula)}{rule}")
    return 0


def cmd_axioms(args) -> int:
    env = load_theory(args.theory)
    if args.json:
        payload = {
            "theory": env.name,
            "packs": sorted(env.packs),
            "constants": {name: render_type(t) for name, t in sorted(env.constants.items())},
            "axioms": [
                {"name": name, "formula": env.axiom_sources.get(name, render(prop.render_source()))}
                for name, prop in env.axioms.items()
            ],
            "definitions": sorted(env.definitions),
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"Theory {env.name} (packs: {', '.join(sorted(env.packs)) or 'none'})")
    for name, t in sorted(env.constants.items()):
        print(f"  constant {name} : {render_type(t)}")
    for name, prop in env.axioms.items():
        print(f"  axiom {name} : {env.axiom_sources.get(name, render(prop.render_source()))}")
    for name in env.definitions:
        print(f"  definition {name}")
    return 0


def cmd_corpus(args) -> int:
    report = run_corpus(args.dir, tuple(args.admit_unsound_axiom))
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    else:
        for r in report.results:
            mark = "PASS" if r.passed else "FAIL"
            detail = f" ({r.message})" if r.message else ""
            print(f"{mark} {r.path} [expected {r.expected}, got {r.outcome}]{detail}")
        print(f"{report.passed}/{report.total} cases passed in {report.wall_time_s:.2f}s")
    return 0 if report.all_passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"check": cmd_check, "parse": cmd_parse, "axioms": cmd_axioms, "corpus": cmd_corpus}[args.command]
    try:
        return handler(args)
    except FileNotFoundError as e:
        print(f"dlk: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"dlk: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
