"""Command-line front end: verify, run, example.

Exit codes: 0 all checks passed; 1 numerical failure (report still
written, residuals included); 2 parse or usage error; 3 validation
error (a model invariant is violated, e.g. requesting closed forms
from a model whose channel is not nondisturbing).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .scenario import Scenario, run_scenario, scenario_from_json
from .serialization import SchemaError, observable_from_json
from .verify import format_summary, run_verification

__all__ = ["main", "entry"]

EXIT_PASS = 0
EXIT_NUMERICAL = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nondisturbing",
        description=(
            "Nondisturbing measurement models: run JSON scenarios with "
            "oracle residuals, or verify the closed forms on seeded "
            "random instances."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run the randomized verification battery")
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--max-dim", type=int, default=4)
    verify.add_argument("--tol", type=float, default=1e-9)

    run = sub.add_parser("run", help="Run a JSON scenario and emit a JSON report")
    run.add_argument("scenario", help="Path to the scenario JSON file")
    run.add_argument("-o", "--output", default=None, help="Report path (default stdout)")
    run.add_argument("--tol", type=float, default=None, help="Override the scenario tolerance")

    example = sub.add_parser("example", help="Run a built-in model family")
    example.add_argument("family", choices=["swap", "fourier"])
    example.add_argument("--n", type=int, required=True, help="Base dimension")
    example.add_argument("--m", type=int, default=None, help="Probe dimension (fourier)")
    example.add_argument(
        "--probe", default="sharp",
        help="'sharp' or a path to an observable JSON file",
    )
    example.add_argument("-o", "--output", default=None)
    example.add_argument("--tol", type=float, default=1e-10)
    return parser


def _emit_report(report: dict[str, Any], output: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def _finish(scenario: Scenario, output: str | None) -> int:
    report = run_scenario(scenario)
    _emit_report(report, output)
    return EXIT_PASS if report["pass"] else EXIT_NUMERICAL


def _cmd_verify(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    if args.max_dim < 2:
        raise _UsageError("--max-dim must be >= 2")
    if args.tol <= 0:
        raise _UsageError("--tol must be positive")
    results, ok = run_verification(args.seed, args.trials, args.max_dim, args.tol)
    sys.stdout.write(format_summary(results, args.seed, args.trials, args.max_dim, args.tol))
    return EXIT_PASS if ok else EXIT_NUMERICAL


def _cmd_run(args) -> int:
    try:
        with open(args.scenario, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        sys.stderr.write(f"error: cannot read {args.scenario}: {exc}\n")
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        sys.stderr.write(
            f"error: {args.scenario} is not valid JSON "
            f"(line {exc.lineno}, column {exc.colno}): {exc.msg}\n"
        )
        return EXIT_PARSE
    scenario = scenario_from_json(document)
    if args.tol is not None:
        if args.tol <= 0:
            raise _UsageError("--tol must be positive")
        scenario = Scenario(
            scenario.model, scenario.inputs, scenario.requests, args.tol, scenario.seed
        )
    return _finish(scenario, args.output)


def _cmd_example(args) -> int:
    if args.tol <= 0:
        raise _UsageError("--tol must be positive")
    spec: dict[str, Any] = {"name": args.family, "n": args.n}
    if args.family == "fourier":
        if args.m is None:
            raise _UsageError("fourier requires --m")
        spec["m"] = args.m
    if args.probe == "sharp":
        spec["probe"] = "sharp"
    else:
        try:
            with open(args.probe, "r", encoding="utf-8") as handle:
                probe_doc = json.load(handle)
        except OSError as exc:
            sys.stderr.write(f"error: cannot read {args.probe}: {exc}\n")
            return EXIT_PARSE
        except json.JSONDecodeError as exc:
            sys.stderr.write(
                f"error: {args.probe} is not valid JSON "
                f"(line {exc.lineno}, column {exc.colno}): {exc.msg}\n"
            )
            return EXIT_PARSE
        observable_from_json(probe_doc, "probe")  # fail fast with a schema path
        spec["probe"] = probe_doc
    document = {
        "example": spec,
        "requests": ["instrument", "observable", "post_probe", "remeasure"],
        "tol": args.tol,
    }
    return _finish(scenario_from_json(document), args.output)


class _UsageError(Exception):
    pass


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_PASS
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_example(args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_PARSE
    except SchemaError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except ValueError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION


def entry() -> None:
    sys.exit(main())
