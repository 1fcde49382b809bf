"""Command line entry point: ``dwarfbench run | report | list``.

Exit status: 0 on success, 1 if any kernel failed verification, 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import DwarfBenchError
from .harness import RunConfig, listing, report, run, verify_failures
from .model import load_device_profile
from .results import read_log
from .stats import RepetitionPolicy

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dwarfbench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run benchmarks and write a log")
    r.add_argument("--benchmarks", type=_csv_list, default=["all"],
                   help="comma-separated names or 'all' (default)")
    r.add_argument("--classes", type=_csv_list, default=None,
                   help="comma-separated size classes (default tiny,small,medium)")
    r.add_argument("--profile", help="device profile file (key=value)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--reps-min", type=int, default=10)
    r.add_argument("--reps-max", type=int, default=100)
    r.add_argument("--target-ci", type=float, default=5.0, metavar="PCT",
                   help="target CI half-width as a percentage of the mean")
    r.add_argument("--ci-level", type=float, default=0.95)
    r.add_argument("--energy", default="off",
                   help="off, mock, mock:<watts>, mock:<profile file>, rapl[:<zone dir>]")
    r.add_argument("--out", help="run log path (default: print to stdout)")
    r.add_argument("--include-large", action="store_true")

    rp = sub.add_parser("report", help="summarize one or more run logs")
    rp.add_argument("logs", nargs="+")
    rp.add_argument("--kind", choices=("summary", "scaling"), default="summary")
    rp.add_argument("--out", help="output directory (default: CSV to stdout)")

    ls = sub.add_parser("list", help="list benchmarks, size classes or size plans")
    ls.add_argument("what", choices=("benchmarks", "classes", "sizes", "sizes-for-profile"))
    ls.add_argument("--profile", help="device profile file for 'sizes'")
    return p


def _cmd_run(args) -> int:
    try:
        policy = RepetitionPolicy(min_reps=args.reps_min, max_reps=args.reps_max,
                                  target_rel_halfwidth=args.target_ci / 100.0,
                                  ci_level=args.ci_level)
    except ValueError as exc:
        raise DwarfBenchError(str(exc)) from exc
    cfg = RunConfig(benchmarks=args.benchmarks, size_classes=args.classes,
                    device_profile=args.profile, seed=args.seed, policy=policy,
                    energy=args.energy, output=args.out, include_large=args.include_large)
    result = run(cfg, on_progress=lambda msg: print(msg, file=sys.stderr))
    if args.out is None:
        from .results import render_log
        sys.stdout.write(render_log(result))
    failed = verify_failures(result)
    if failed:
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _cmd_report(args) -> int:
    logs = [read_log(p) for p in args.logs]
    rep = report(logs, args.kind)
    if args.out:
        for path in rep.write(args.out):
            print(path)
    else:
        sys.stdout.write(rep.csv)
    return EXIT_OK


def _cmd_list(args) -> int:
    profile = load_device_profile(args.profile) if args.profile else None
    sys.stdout.write(listing(args.what, profile))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "report": _cmd_report, "list": _cmd_list}[args.command]
    try:
        return handler(args)
    except (DwarfBenchError, OSError) as exc:
        print(f"dwarfbench: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
