"""Command-line front end.

Exit codes: 0 success, 1 partial failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .bench import (
    DEFAULT_BOOTSTRAP,
    DEFAULT_DELTA,
    collect_fit_groups,
    fit_exponent,
    format_csv,
    load_config,
    plan_tasks,
    read_rows,
    run_bench,
    write_atomic,
)
from .errors import LandscapeFormatError, QWalkError, ValidationError
from .landscape import load_landscape

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_MALFORMED = 2


def bundled_config_path() -> Path:
    return Path(str(resources.files("qwalk") / "data" / "bench.ini"))


def cmd_validate(args) -> int:
    try:
        landscape = load_landscape(args.landscape)
    except LandscapeFormatError as exc:
        print(f"{args.landscape}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (OSError, ValidationError) as exc:
        print(f"{args.landscape}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    s = landscape.summary()
    print(f"coords={s['coords']} bits={s['bits']}")
    print(f"states={s['states']} ground={s['ground']}")
    print(f"min_energy={s['min_energy']!r} max_energy={s['max_energy']!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    path = Path(args.config) if args.config else bundled_config_path()
    try:
        config = load_config(path)
    except (OSError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.out is not None:
        config = replace(config, output=Path(args.out))
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    tasks = plan_tasks(config)
    if args.dry_run:
        for task in tasks:
            s = task.schedule
            print(
                f"task {task.index}: instance={task.instance_id} kind={s.kind} "
                f"beta1={s.beta1!r} alpha={s.alpha!r} T={task.T} delta={task.delta!r} "
                f"seed={task.seed}"
            )
        print(f"{len(tasks)} tasks; would write {config.output}")
        return EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows, errors = run_bench(config)
    write_atomic(config.output, format_csv(rows))
    print(f"wrote {len(rows)} rows to {config.output}")
    for err in errors:
        print(f"failed: {err}", file=sys.stderr)
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_fit(args) -> int:
    try:
        rows = read_rows(args.input)
    except (OSError, ValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    groups = collect_fit_groups(rows, args.delta)
    if not groups:
        print(f"no min rows with delta={args.delta!r}", file=sys.stderr)
        return EXIT_PARTIAL
    status = EXIT_OK
    for i, group in enumerate(groups):
        kind, beta1, alpha = group.key
        if i:
            print()
        print(f"schedule_kind={kind}\nbeta1={beta1!r}\nalpha={alpha!r}")
        if group.excluded:
            print(f"warning: excluded {group.excluded} nonpositive TTS rows", file=sys.stderr)
        if group.missing:
            print(f"missing pairs: {','.join(group.missing)}", file=sys.stderr)
            status = EXIT_PARTIAL
        if len(group.points) < 3:
            print(f"error: need 3 instances, have {len(group.points)}", file=sys.stderr)
            status = EXIT_PARTIAL
            continue
        try:
            fit = fit_exponent(group.points, args.bootstrap, args.seed)
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = EXIT_PARTIAL
            continue
        print(fit.record(), end="")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk", description="Quantum walk and quantum Metropolis benchmarking toolkit."
    )
    parser.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a landscape file and summarize it")
    p.add_argument("landscape")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run classical vs quantum TTS benchmarks")
    p.add_argument("--config", help="INI run config (default: the bundled one)")
    p.add_argument("--dry-run", action="store_true", help="print the plan, write nothing")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", help="override the configured output CSV")
    p.add_argument("--workers", type=int, help="process pool size")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="fit min-TTS scaling exponents from a bench CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--bootstrap", type=int, default=DEFAULT_BOOTSTRAP)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    if args.command == "fit" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except QWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
