"""Command-line entry point: run a session file and print its reports."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dsl import run_session
from .errors import DslSyntaxError


def _default_truncation() -> int:
    raw = os.environ.get("RHOCALC_TRUNC", "8")
    try:
        return int(raw)
    except ValueError:
        return 8


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rhocalc",
                                description="Exact color-graded algebra calculator")
    sub = p.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a session file")
    runp.add_argument("session", help="path to a .rc session file")
    runp.add_argument("--json", action="store_true", dest="as_json",
                      help="emit one JSON document instead of text")
    runp.add_argument("--trunc", type=int, default=None,
                      help="truncation order (default: RHOCALC_TRUNC or 8)")
    return p


def _human(reports) -> str:
    lines = []
    for r in reports:
        lines.append(f"== {r.command}")
        lines.append("   ok" if r.ok else "   ERROR")
        lines.append("   " + json.dumps(r.result, sort_keys=True, default=str))
    return "\n".join(lines) + ("\n" if lines else "")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    trunc = args.trunc if args.trunc is not None else _default_truncation()
    try:
        with open(args.session, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"rhocalc: cannot read {args.session}: {e}", file=sys.stderr)
        return 2
    try:
        reports, ok = run_session(text, trunc)
    except DslSyntaxError as e:
        print(f"rhocalc: syntax error: {e}", file=sys.stderr)
        return 2
    if args.as_json:
        doc = {"schema": 1, "reports": [r.payload() for r in reports]}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True, default=str))
        sys.stdout.write("\n")
    else:
        sys.stdout.write(_human(reports))
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
