"""Command-line driver.

Exit status: 0 secure, 1 misuse (or a non-interference counterexample),
2 unreadable input, malformed program or policy, 3 internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from . import __version__
from .analyzer import analyze_program
from .interpreter import DEFAULT_STEP_BUDGET
from .labels import Label, LabelError, Universe, label_from_json
from .lexer import PyxSyntaxError
from .oracle import OracleError, check_ni
from .parser import parse_source
from .policy import PolicyError, load_policy
from .report import AnalysisInputError, FixpointError

EXIT_SECURE = 0
EXIT_MISUSE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(Exception):
    pass


def _color_enabled(stream) -> bool:
    if os.environ.get("PIFTHON_COLOR", "") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _paint(text: str, code: str, on: bool) -> str:
    return f"\033[{code}m{text}\033[0m" if on else text


_TEXT_LABEL = re.compile(r"^\(\s*([^,\s{}()]+)\s*,\s*\{([^}]*)\}\s*,\s*\{([^}]*)\}\s*\)$")


def parse_label_text(universe: Universe, text: str) -> Label:
    """Read a label written as ``(owner,{r1,r2},{w1})`` or as a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return label_from_json(universe, json.loads(text))
        except json.JSONDecodeError as exc:
            raise LabelError(f"observer is not valid JSON: {exc}") from None
    m = _TEXT_LABEL.match(text)
    if not m:
        raise LabelError(f"cannot read label {text!r}")

    def names(s):
        return [n.strip() for n in s.split(",") if n.strip()]

    return universe.label(m.group(1), universe.resolve(names(m.group(2))), universe.resolve(names(m.group(3))))


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None


def _load(program_path: str, policy_path: str):
    source = _read(program_path)
    try:
        spec = load_policy(policy_path)
    except OSError as exc:
        raise InputError(f"{policy_path}: {exc.strerror or exc}") from None
    except PolicyError as exc:
        raise InputError(f"{policy_path}: {exc}") from None
    try:
        prog = parse_source(source)
    except PyxSyntaxError as exc:
        raise InputError(f"{program_path}: {exc}") from None
    return prog, spec


def _check_paths(paths: Sequence[str]) -> None:
    for p in paths:
        if not os.path.isfile(p) or not os.access(p, os.R_OK):
            raise InputError(f"{p}: no such readable file")


def _analyze_one(path: str, args) -> tuple:
    """Return (exit code, rendered output) for one program file."""
    try:
        prog, spec = _load(path, args.policy)
        report = analyze_program(spec, prog, keep_going=args.keep_going, trace=args.trace)
    except (InputError, AnalysisInputError) as exc:
        return EXIT_INPUT, f"error: {exc}"
    except FixpointError as exc:
        return EXIT_INTERNAL, f"internal error: {path}: {exc}"
    code = EXIT_SECURE if report.secure else EXIT_MISUSE
    if args.format == "json":
        return code, report.dumps()
    return code, report.render()


def _emit_text(text: str, code: int, color: bool) -> str:
    if not color:
        return text
    lines = text.splitlines()
    out = []
    for line in lines:
        if line.startswith("SECURE"):
            line = _paint(line, "32", True)
        elif line.startswith("MISUSE") or line.startswith("error") or line.startswith("internal error"):
            line = _paint(line, "31", True)
        out.append(line)
    return "\n".join(out)


def cmd_analyze(args, out, err) -> int:
    try:
        _check_paths([*args.programs, args.policy])
    except InputError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    with ThreadPoolExecutor(max_workers=min(8, len(args.programs))) as pool:
        results = list(pool.map(lambda p: _analyze_one(p, args), args.programs))
    color = args.format == "text" and _color_enabled(out)
    codes = []
    if args.format == "json" and len(args.programs) > 1:
        docs = {}
        for path, (code, text) in zip(args.programs, results):
            codes.append(code)
            docs[path] = json.loads(text) if code in (EXIT_SECURE, EXIT_MISUSE) else {"error": text}
        print(json.dumps(docs, indent=2, sort_keys=True, ensure_ascii=False), file=out)
    else:
        for path, (code, text) in zip(args.programs, results):
            codes.append(code)
            if len(args.programs) > 1:
                print(f"== {path} ==", file=out)
            stream = err if code in (EXIT_INPUT, EXIT_INTERNAL) else out
            print(_emit_text(text, code, color), file=stream)
    return max(codes)


def cmd_verify(args, out, err) -> int:
    try:
        _check_paths([args.program, args.policy])
        prog, spec = _load(args.program, args.policy)
        observer_text = _read(args.observer) if os.path.isfile(args.observer) else args.observer
        try:
            observer = parse_label_text(spec.universe, observer_text)
        except LabelError as exc:
            raise InputError(f"observer: {exc}") from None
        report = analyze_program(spec, prog)
        if not report.secure and not args.force:
            print(report.render() if args.format == "text" else report.dumps(), file=out)
            print("verify: the analyzer rejected the program; use --force to check it anyway", file=err)
            return EXIT_MISUSE
        verdict = check_ni(prog, spec, observer, pair_samples=args.pairs, step_budget=args.budget,
                           force=args.force, seed=args.seed, report=report)
    except (InputError, AnalysisInputError, OracleError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except FixpointError as exc:
        print(f"internal error: {exc}", file=err)
        return EXIT_INTERNAL
    if args.format == "json":
        doc = verdict.to_json()
        doc["observer"] = observer.to_json()
        doc["budget"] = args.budget
        print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False), file=out)
    elif verdict.found:
        print(f"COUNTEREXAMPLE for observer {observer}", file=out)
        print(f"  input 1: {verdict.store1}", file=out)
        print(f"  input 2: {verdict.store2}", file=out)
        print(f"  run 1 {verdict.observation1.status}: {verdict.observation1.as_dict()}", file=out)
        print(f"  run 2 {verdict.observation2.status}: {verdict.observation2.as_dict()}", file=out)
        if verdict.variable:
            print(f"  differs in: {verdict.variable}", file=out)
    else:
        scope = "all" if verdict.exhaustive else "sampled"
        print(f"NO COUNTEREXAMPLE for observer {observer}: {verdict.pairs_checked} {scope} "
              f"low-equivalent pairs over {verdict.trials} runs, step budget {args.budget}", file=out)
    return EXIT_MISUSE if verdict.found else EXIT_SECURE


def cmd_corpus(args, out, err) -> int:
    from . import golden

    rows = []
    ok = True
    for e in golden.entries():
        report = analyze_program(e.spec(), e.program())
        got = report.verdict.value
        line = report.diagnostics[0].line if report.diagnostics else None
        match = got == e.verdict and (e.line is None or e.line == line)
        ok = ok and match
        rows.append({"name": e.name, "expected": e.verdict, "verdict": got, "line": line, "ok": match})
    if args.format == "json":
        print(json.dumps(rows, indent=2, sort_keys=True), file=out)
    else:
        for r in rows:
            where = f" (line {r['line']})" if r["line"] else ""
            print(f"{'ok  ' if r['ok'] else 'FAIL'} {r['name']}: {r['verdict']}{where}", file=out)
    return EXIT_SECURE if ok else EXIT_MISUSE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pyxflow", description="Information-flow analysis for PyX programs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def analysis_args(p):
        p.add_argument("programs", nargs="+", metavar="PROGRAM", help="PyX source file(s)")
        p.add_argument("--policy", required=True, help="JSON policy file")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--keep-going", action="store_true",
                       help="report every failed check instead of stopping at the first")

    a = sub.add_parser("analyze", help="label a program and report misuse")
    analysis_args(a)
    a.add_argument("--trace", action="store_true", help="print labels after every statement")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("trace", help="same as 'analyze --trace'")
    analysis_args(t)
    t.set_defaults(func=cmd_analyze, trace=True)

    v = sub.add_parser("verify", help="search for a non-interference counterexample")
    v.add_argument("program")
    v.add_argument("--policy", required=True)
    v.add_argument("--observer", required=True,
                   help="observer label as JSON, as (owner,{readers},{writers}), or a file holding either")
    v.add_argument("--budget", type=int, default=DEFAULT_STEP_BUDGET, help="step budget per run")
    v.add_argument("--pairs", type=int, default=256, help="enumerate up to this many pairs, else sample")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--force", action="store_true", help="check even if the analyzer rejects the program")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("corpus", help="check the bundled examples against their expected verdicts")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_corpus)
    return ap


def run_cli(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_SECURE
    if getattr(args, "budget", 1) < 1 or getattr(args, "pairs", 1) < 1:
        print("error: --budget and --pairs must be positive", file=err)
        return EXIT_INPUT
    try:
        return args.func(args, out, err)
    except Exception as exc:  # noqa: BLE001 - last-resort guard for the exit-code contract
        print(f"internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_cli())
