"""Command line: batch solves over .sld files and the local HTTP service.

Exit codes for ``solve``: 0 converged, 2 invalid input/validation failure,
3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import components as comp
from .errors import SldError
from .persistence import load_project
from .pipeline import run_solve

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER_FAILURE = 3

_MODE_ALIASES = {
    "perunit": comp.PER_UNIT, "per-unit": comp.PER_UNIT, "pu": comp.PER_UNIT,
    "powerflow": comp.POWER_FLOW, "power-flow": comp.POWER_FLOW, "pf": comp.POWER_FLOW,
    "stateestimation": comp.STATE_ESTIMATION, "state-estimation": comp.STATE_ESTIMATION,
    "se": comp.STATE_ESTIMATION,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sldkit", description="single-line-diagram workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a saved project")
    solve.add_argument("--input", required=True, help="path to a .sld project")
    solve.add_argument("--mode", help="per-unit | powerflow | stateestimation "
                                      "(defaults to the mode stored in the file)")
    solve.add_argument("--method", help="gs | nr | wls | fdse")
    solve.add_argument("--iterations", type=int, help="iteration cap override")
    solve.add_argument("--tolerance", type=float, help="convergence tolerance override")
    solve.add_argument("--acceleration", type=float,
                       help="Gauss-Seidel acceleration constant override")
    solve.add_argument("--trace", help="write the rendered calculation window here")
    solve.add_argument("--output", default="-",
                       help="solution JSON path, or - for stdout (default)")

    validate = sub.add_parser("validate", help="report violations for a project")
    validate.add_argument("--input", required=True)
    validate.add_argument("--mode")

    serve = sub.add_parser("serve", help="run the local HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int,
                       default=int(os.environ.get("SLDKIT_PORT", "8787")))
    return parser


def _canonical_mode(token: str | None) -> str | None:
    if token is None:
        return None
    mode = _MODE_ALIASES.get(token.lower())
    if mode is None:
        raise SldError(f"unknown mode {token!r}")
    return mode


def _write_output(payload: dict, target: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if target == "-":
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_solve(args) -> int:
    try:
        mode = _canonical_mode(args.mode)
    except SldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        net, mode = load_project(args.input, mode)
    except SldError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INVALID

    outcome = run_solve(net, method=args.method, iterations=args.iterations,
                        tolerance=args.tolerance, acceleration=args.acceleration)
    payload = outcome.to_json()
    payload["mode"] = mode
    _write_output(payload, args.output)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(outcome.trace_text)
    if outcome.status == "invalid":
        for violation in outcome.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_INVALID
    if outcome.status == "failed":
        print(f"solver failure: {outcome.error}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        net, _ = load_project(args.input, _canonical_mode(args.mode))
    except SldError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    violations = net.validate()
    for violation in violations:
        print(str(violation))
    return EXIT_INVALID if violations else EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
