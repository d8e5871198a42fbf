"""Command-line front end.

Exit codes are a stable contract for scripts: 0 success/feasible,
1 infeasible model, 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .consequences import (
    DEFAULT_ENUM_LIMIT,
    valid_domains_enumerate,
    valid_domains_probe,
    model_consequences,
)
from .domain import Domain
from .errors import (
    InfeasibleModelError,
    ParseError,
    ResourceLimitError,
    TranslateError,
)
from .model import parse_model
from .session import apply_transcript, create_session
from .solver import DEFAULT_NODE_BUDGET, EnumResult
from .translate import compile_model

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SystemExit(_input_error(f"cannot read {path}: {exc.strerror}"))


def _input_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _load_model(path: str):
    text = _read_file(path)
    try:
        return parse_model(text)
    except ParseError as exc:
        raise SystemExit(_input_error(f"{path}:{exc.line}:{exc.col}: {exc.message}"))


def _compile(model, node_budget: int):
    try:
        return compile_model(model, node_budget=node_budget)
    except TranslateError as exc:
        raise SystemExit(_input_error(str(exc)))


def _fmt_domain(dom: Domain) -> str:
    if dom.is_empty:
        return "{}"
    parts = (str(lo) if lo == hi else f"{lo}..{hi}" for lo, hi in dom.ivs)
    return "{" + ", ".join(parts) + "}"


def cmd_check(args) -> int:
    m = _load_model(args.model)
    cm = _compile(m, args.node_budget)
    try:
        conseq = model_consequences(cm)
    except InfeasibleModelError:
        print(f"{args.model}: infeasible (no valid product)")
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    print(f"{args.model}: feasible "
          f"({len(m.features)} features, {len(m.attributes)} attributes, "
          f"{len(m.cross_constraints)} constraints)")
    if args.verbose:
        for name, dom in conseq.variables.items():
            print(f"  {name}: {_fmt_domain(dom)}")
    return EXIT_OK


def cmd_consequences(args) -> int:
    m = _load_model(args.model)
    cm = _compile(m, args.node_budget)
    try:
        model_consequences(cm)  # feasibility gate
        if args.method == "enumerate":
            conseq = valid_domains_enumerate(cm)
        else:
            conseq = valid_domains_probe(cm)
    except InfeasibleModelError:
        print(f"{args.model}: infeasible (no valid product)", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    if not conseq.complete:
        print("error: search budget exhausted before completion", file=sys.stderr)
        return EXIT_LIMIT
    if args.json:
        payload = conseq.to_json_dict()
        # keep the two methods byte-identical: counting is `fdconfig count`
        payload["solutionCount"] = None
        print(json.dumps(payload, indent=2))
    else:
        width = max(len(n) for n in conseq.variables)
        for name, dom in conseq.variables.items():
            print(f"{name:<{width}}  {_fmt_domain(dom)}")
    return EXIT_OK


def cmd_count(args) -> int:
    m = _load_model(args.model)
    cm = _compile(m, args.node_budget)
    counted = 0

    def visit(_sol):
        nonlocal counted
        counted += 1

    try:
        result = cm.solver.enumerate(args.limit, visit)
    except ResourceLimitError:
        print(f"at least {counted} solutions (node budget exhausted)",
              file=sys.stderr)
        return EXIT_LIMIT
    if result is not EnumResult.EXHAUSTED_ALL:
        print(f"at least {counted} solutions (limit hit)", file=sys.stderr)
        return EXIT_LIMIT
    print(counted)
    return EXIT_OK if counted > 0 else EXIT_INFEASIBLE


def cmd_replay(args) -> int:
    m = _load_model(args.model)
    text = _read_file(args.transcript)
    try:
        steps = json.loads(text)
    except json.JSONDecodeError as exc:
        return _input_error(f"{args.transcript}: invalid JSON ({exc.msg})")
    if not isinstance(steps, list):
        return _input_error(f"{args.transcript}: transcript must be a JSON array")
    try:
        session = create_session(m, node_budget=args.node_budget,
                                 inline_recompute=True)
    except InfeasibleModelError:
        print(f"{args.model}: infeasible (no valid product)", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TranslateError as exc:
        return _input_error(str(exc))
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    try:
        apply_transcript(session, steps)
    except ValueError as exc:
        return _input_error(str(exc))
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    print(json.dumps(session.get_state().to_json_dict(), indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import server

    server.run(host=args.host, port=args.port,
               session_cap=args.session_cap, node_budget=args.node_budget)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdconfig",
        description="Interactive product configuration over extended feature models")
    parser.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET,
                        help="search node budget per solver call")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse a model and check feasibility")
    p.add_argument("model")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="also print the model consequences")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("consequences", help="print valid domains")
    p.add_argument("model")
    p.add_argument("--method", choices=("probe", "enumerate"), default="probe")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_consequences)

    p = sub.add_parser("count", help="count all solutions")
    p.add_argument("model")
    p.add_argument("--limit", type=int, default=DEFAULT_ENUM_LIMIT)
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("replay", help="apply a decision transcript, print the snapshot")
    p.add_argument("model")
    p.add_argument("transcript")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("FDCONFIG_PORT", "7070")))
    p.add_argument("--session-cap", type=int, default=100)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
