"""Command line interface.

    anosov-lab run <config> --out <dir> [--threads N] [--seed S]
    anosov-lab validate <config>

Exit codes: 0 success (falsified properties are still success), 2 config
error, 3 budget error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config, validate_config
from .errors import AnosovLabError, ParseError, ValidationError
from .pipeline import run
from .reports import emit_reports

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="anosov-lab",
        description="gap certificates, limit sets and dimension estimates "
        "for matrix-group representations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a pipeline config")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="cap BLAS thread pools")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_val = sub.add_parser("validate", help="parse and validate a config")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        config = parse_config(text)
        validate_config(config)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnosovLabError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"OK: {args.config}")
        return EXIT_OK

    if args.seed is not None:
        config.seed = args.seed

    if args.threads is not None:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=args.threads):
            record = run(config)
    else:
        record = run(config)

    manifest = emit_reports(record, args.out)
    for step in record.steps:
        if step.status == "ok":
            brief = ", ".join(
                f"{k}={_short(v)}" for k, v in sorted(step.summary.items())
            )
            print(f"[ok]    {step.command}: {brief}")
        else:
            print(f"[error] {step.command}: {step.error_kind}: {step.error}")
    print(f"wrote {len(manifest)} files to {args.out}")

    if record.budget_failed():
        return EXIT_BUDGET
    if record.failed:
        return EXIT_NUMERIC
    return EXIT_OK


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    s = str(v)
    return s if len(s) <= 40 else s[:37] + "..."


if __name__ == "__main__":
    sys.exit(main())
