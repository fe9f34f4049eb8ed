#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Command-line interface.

    python -m spin_expansion partition --model config/ising.json --beta 1 --lambda 1e-5
    python -m spin_expansion sample --model config/ising.json --beta 1 --lambda 1e-5 \\
        --samples 10 --seed 7
    python -m spin_expansion compare --model config/ising.json --beta 1 --lambda 1e-5
    python -m spin_expansion validate --model config/ising.json

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 cap exceeded.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, TextIO

import colorlog

from .api import ClusterExpansionClient
from .config import (
    COMPARE_REPORT_SCHEMA,
    PARTITION_REPORT_SCHEMA,
    SAMPLE_REPORT_SCHEMA,
    VALIDATION_REPORT_SCHEMA,
    load_model,
    parse_overrides,
    parse_params,
    parse_run_options,
)
from .const import (
    ATTR_PARTIALS,
    ATTR_QUERIES,
    ATTR_SAMPLES,
    ATTR_SEED,
    ATTR_VIOLATIONS,
    CONF_BETA,
    CONF_EPSILON,
    CONF_LAMBDA,
    CONF_SEED,
    DEFAULT_LOG_LEVEL,
    EXIT_OK,
    EXIT_VALIDATION,
    FLOAT_DIGITS,
    STARTUP_MESSAGE,
)
from .exceptions import ModelError, SpinExpansionError
from .model import validate_model

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(level: str) -> None:
    """Install a colored handler on the root logger."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if isinstance(existing.formatter, colorlog.ColoredFormatter):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level.upper())


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    parser = argparse.ArgumentParser(
        prog="spin_expansion",
        description="Cluster expansion for weakly-interacting quantum spin systems.",
    )
    parser.add_argument(
        "--log-level",
        default=DEFAULT_LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="JSON model document")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--beta", type=float, required=True)
    run.add_argument(
        "--lambda", "--lambda-re", dest="lambda_re", type=float, default=0.0
    )
    run.add_argument("--lambda-im", dest="lambda_im", type=float, default=0.0)
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="run option override (truncation_c0, truncation_order, ...)",
    )

    partition = commands.add_parser("partition", parents=[common, run])
    partition.add_argument(
        "--unnormalized", action="store_true", help="report Z with Tr(I) = d^n"
    )

    sample = commands.add_parser("sample", parents=[common, run])
    sample.add_argument("--samples", type=int, default=1)
    sample.add_argument("--seed", type=int, default=None)

    commands.add_parser("compare", parents=[common, run])
    commands.add_parser("validate", parents=[common])
    return parser


def _fmt(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.{FLOAT_DIGITS}g}"
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, float) for v in value
    ):
        return f"{value[0]:.{FLOAT_DIGITS}g} {value[1]:+.{FLOAT_DIGITS}g}j"
    return str(value)


def _write_report(
    report: Dict[str, Any], schema, as_json: bool, out: TextIO
) -> None:
    schema(report)
    if as_json:
        out.write(json.dumps(report, sort_keys=True) + "\n")
        return
    for key, value in report.items():
        if key == ATTR_PARTIALS:
            for order, partial in enumerate(value, start=1):
                out.write(f"partial[{order}]: {_fmt(partial)}\n")
        elif key == ATTR_VIOLATIONS:
            for violation in value:
                out.write(
                    f"violation: {violation['kind']} {violation['target']}: "
                    f"{violation['detail']}\n"
                )
        elif isinstance(value, list) and value and isinstance(value[0], str):
            for item in value:
                out.write(f"{key}: {item}\n")
        else:
            out.write(f"{key}: {_fmt(value)}\n")


def _client(args: argparse.Namespace) -> ClusterExpansionClient:
    model = load_model(args.model)
    report = validate_model(model)
    if not report.valid:
        first = report.violations[0]
        raise ModelError(f"Invalid model: {first.target}: {first.detail}")

    params = parse_params(
        {
            CONF_BETA: args.beta,
            CONF_LAMBDA: [args.lambda_re, args.lambda_im],
            CONF_EPSILON: args.epsilon,
            CONF_SEED: getattr(args, "seed", None),
        }
    )
    options = parse_run_options(parse_overrides(args.overrides), args.workers)
    return ClusterExpansionClient(model, params, options)


def cmd_partition(args: argparse.Namespace, out: TextIO) -> int:
    """Estimate Z and report the expansion."""
    report = _client(args).partition(unnormalized=args.unnormalized)
    _write_report(report, PARTITION_REPORT_SCHEMA, args.json, out)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace, out: TextIO) -> int:
    """Draw samples; one d-ary string per line plus a footer."""
    if args.samples < 0:
        raise ModelError(f"--samples must be >= 0: {args.samples}")
    report = _client(args).sample(args.samples, args.seed)
    SAMPLE_REPORT_SCHEMA(report)
    if args.json:
        out.write(json.dumps(report, sort_keys=True) + "\n")
        return EXIT_OK
    for line in report[ATTR_SAMPLES]:
        out.write(line + "\n")
    out.write(f"# seed={report[ATTR_SEED]} queries={report[ATTR_QUERIES]}\n")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, out: TextIO) -> int:
    """Compare the estimator against the exact oracle."""
    report = _client(args).compare()
    _write_report(report, COMPARE_REPORT_SCHEMA, args.json, out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, out: TextIO) -> int:
    """Check the model document and its operators."""
    report = validate_model(load_model(args.model)).as_dict()
    _write_report(report, VALIDATION_REPORT_SCHEMA, args.json, out)
    return EXIT_OK if report["valid"] else EXIT_VALIDATION


COMMANDS = {
    "partition": cmd_partition,
    "sample": cmd_sample,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    """Run the command line and return the exit code."""
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    _LOGGER.info(STARTUP_MESSAGE)

    try:
        return COMMANDS[args.command](args, out)
    except SpinExpansionError as err:
        _LOGGER.debug("Command %s failed", args.command, exc_info=True)
        sys.stderr.write(f"error: {err}\n")
        return err.status
