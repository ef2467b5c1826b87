"""
Argument parsing and dispatch for run.py.

Usage:
    python run.py [command] [options]

Commands:
    assign          Label anchors with every configured assigner
    stats           MOB histogram and IoU vs maIoU joint histogram
    bench           Time brute-force against integral-image maIoU
    compare         Label transitions between two or more assigners
    validate-config Validate a run configuration file
"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.cli.commands import (
    EXIT_INPUT,
    EXIT_USAGE,
    cmd_assign,
    cmd_bench,
    cmd_compare,
    cmd_stats,
    cmd_validate_config,
    parse_assigner,
    validation_message,
)
from src.config.run_config import RunConfig, apply_overrides, load_run_config
from src.config.settings import settings
from src.core.anchors import expected_count
from src.utils.errors import MaiouError, UsageError
from src.utils.logging import setup_logging

DEFAULT_BENCH_GTS = 8


def _add_common(parser: argparse.ArgumentParser, dataset: bool = True):
    parser.add_argument("--config", type=str, help="JSON or TOML run configuration")
    if dataset:
        parser.add_argument("--dataset", type=str, help="COCO instances JSON file")
        parser.add_argument("--include-crowd", action="store_true", default=None,
                            help="Keep iscrowd=1 annotations")
        parser.add_argument("--assigner", action="append", metavar="KIND:MEASURE[:key=value...]",
                            help="Assigner spec, repeatable (keys: k, tau_neg, tau_pos, preset)")
    parser.add_argument("--out", type=str, help="Output directory")
    parser.add_argument("--workers", type=int, help="Worker threads")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--log-level", type=str, help="Overrides MAIOU_LOG")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run.py", description=f"{settings.PROJECT_NAME} mask-aware IoU toolkit")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Assign command
    assign_parser = subparsers.add_parser("assign", help="Label anchors with every configured assigner")
    _add_common(assign_parser)

    # Stats command
    stats_parser = subparsers.add_parser("stats", help="MOB and IoU vs maIoU histograms")
    _add_common(stats_parser)
    stats_parser.add_argument("--bins", type=int, help="Histogram bins per axis")
    stats_parser.add_argument("--skip-mob", action="store_true", help="Do not compute the MOB histogram")
    stats_parser.add_argument("--skip-joint", action="store_true", help="Do not compute the joint histogram")

    # Bench command
    bench_parser = subparsers.add_parser("bench", help="Time brute-force against integral-image maIoU")
    _add_common(bench_parser, dataset=False)
    bench_parser.add_argument("--repetitions", type=int, help="Timed runs per case (median reported)")
    bench_parser.add_argument("--grid", type=int, action="append",
                              help="Square image size, repeatable; replaces the configured cases")
    bench_parser.add_argument("--anchors", type=int, action="append",
                              help="Anchors per case (default: the full anchor grid of --grid)")
    bench_parser.add_argument("--gts", type=int, action="append",
                              help=f"Ground truths per case (default: {DEFAULT_BENCH_GTS})")

    # Compare command
    compare_parser = subparsers.add_parser("compare", help="Label transitions between assigners")
    _add_common(compare_parser)

    # Validate config command
    validate_parser = subparsers.add_parser("validate-config", help="Validate a run configuration file")
    validate_parser.add_argument("config", nargs="?", help="JSON or TOML run configuration")

    return parser


def _broadcast(values: Optional[List[int]], count: int, name: str) -> Optional[List[int]]:
    if values is None or len(values) == count:
        return values
    if len(values) == 1:
        return values * count
    raise UsageError(f"--{name} was given {len(values)} times for {count} bench cases")


def _bench_overrides(args: argparse.Namespace, cfg: RunConfig) -> dict:
    if not (args.grid or args.anchors or args.gts):
        return {}
    grids = args.grid or cfg.bench.grids
    count = max(len(grids), len(args.anchors or []), len(args.gts or []))
    grids = _broadcast(grids, count, "grid")
    anchors = _broadcast(args.anchors, count, "anchors") or [expected_count(g, g) for g in grids]
    gts = _broadcast(args.gts, count, "gts") or [DEFAULT_BENCH_GTS] * count
    return {"bench.grids": grids, "bench.anchors": anchors, "bench.gts": gts}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, then flags; flags win"""
    cfg = load_run_config(args.config)
    overrides = {
        "out": args.out,
        "workers": args.workers,
        "seed": args.seed,
        "dataset": getattr(args, "dataset", None),
        "include_crowd": getattr(args, "include_crowd", None),
    }
    if getattr(args, "assigner", None):
        overrides["assigners"] = [parse_assigner(text) for text in args.assigner]
    if args.command == "stats":
        overrides["analysis.bins"] = args.bins
        if args.skip_mob:
            overrides["analysis.mob"] = False
        if args.skip_joint:
            overrides["analysis.joint"] = False
    if args.command == "bench":
        overrides["bench.repetitions"] = args.repetitions
        overrides.update(_bench_overrides(args, cfg))
    return apply_overrides(cfg, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    setup_logging(getattr(args, "log_level", None))

    if args.command == "validate-config":
        return cmd_validate_config(args.config)

    try:
        cfg = build_config(args)
    except ValidationError as e:
        print(f"error: invalid configuration: {validation_message(e)}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MaiouError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "assign":
        return cmd_assign(cfg)
    elif args.command == "stats":
        return cmd_stats(cfg)
    elif args.command == "bench":
        return cmd_bench(cfg)
    elif args.command == "compare":
        return cmd_compare(cfg)
    parser.print_help()
    return EXIT_USAGE
