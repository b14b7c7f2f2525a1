"""
Main entry point for bgtile.
Loads configuration, parses the command line and runs one subcommand.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from dotenv import load_dotenv

from cli.commands import (
    CommandResult,
    cmd_certify,
    cmd_check,
    cmd_construct,
    cmd_random,
    cmd_stats,
    cmd_sweep,
    cmd_tile,
)
from core.errors import InvariantViolation
from core.solver import SearchBudget
from core.tiler import TilerConfig
from utils.formatters import format_report
from utils.logger import configure_logging, get_logger

# Load environment variables
load_dotenv()

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2

DEFAULT_CONFIG = {
    "solver": {"node_limit": None, "time_limit": None},
    "tiler": {"alpha": 0.01, "fallback_n_cap": 40},
    "sweep": {"trials": 5, "seed": 0, "density": 0.5, "workers": 1, "record_timing": False},
    "random": {"density": 0.5, "seed": None},
    "output": {"format": "bge"},
    "logging": {"level": "INFO"},
}


class UsageError(Exception):
    """Bad command line."""


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; route them to exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def load_config(path: Optional[str] = None) -> dict:
    """
    Load configuration from a YAML file, merged over the defaults.

    Args:
        path: Explicit config path (--config); otherwise BGTILE_CONFIG or ./config.yaml

    Returns:
        Config dict

    Raises:
        FileNotFoundError: an explicitly requested file does not exist
    """
    explicit = path is not None
    config_path = Path(path or os.getenv("BGTILE_CONFIG", "config.yaml"))
    config = {section: dict(values) for section, values in DEFAULT_CONFIG.items()}

    if not config_path.exists():
        if explicit:
            raise FileNotFoundError(f"Config file {config_path} not found")
        logger.warning(f"{config_path} not found, using defaults")
        return config

    with open(config_path, 'r', encoding='utf-8') as f:
        loaded = yaml.safe_load(f) or {}
    for section, values in loaded.items():
        if isinstance(values, dict):
            config.setdefault(section, {}).update(values)
        else:
            config[section] = values
    logger.debug(f"Configuration loaded from {config_path}")
    return config


def parse_ks(text: str) -> List[int]:
    """
    Parse a k range.

    Examples:
        "2" -> [2]
        "2,3,5" -> [2, 3, 5]
        "2-4" -> [2, 3, 4]
    """
    ks = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            ks.extend(range(int(lo), int(hi) + 1))
        elif part:
            ks.append(int(part))
    if not ks or min(ks) < 1:
        raise ValueError(f"Invalid k range {text!r}")
    return ks


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bgtile", description="K_{s,t}-factors of balanced bipartite graphs")
    parser.add_argument("--config", help="config YAML (default: $BGTILE_CONFIG or config.yaml)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_st(p, required=True):
        p.add_argument("--s", type=int, required=required, help="size of the small part")
        p.add_argument("--t", type=int, required=required, help="size of the large part")

    def add_out(p):
        p.add_argument("--out", help="output path (default: stdout)")

    def add_format(p):
        p.add_argument("--format", choices=["bge", "json"], help="graph file format")

    p = sub.add_parser("construct", help="build a lower-bound construction or a C4-free gadget")
    p.add_argument("case", choices=["even", "odd-mid", "odd-succ", "P", "Q", "R"])
    add_st(p, required=False)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    add_format(p)
    add_out(p)

    p = sub.add_parser("check", help="decide factor existence by exact search")
    p.add_argument("graph")
    add_st(p)
    p.add_argument("--budget-nodes", type=int)
    p.add_argument("--budget-secs", type=float)
    add_out(p)

    p = sub.add_parser("tile", help="tile constructively, falling back to exact search")
    p.add_argument("graph")
    add_st(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget-nodes", type=int)
    p.add_argument("--budget-secs", type=float)
    add_out(p)

    p = sub.add_parser("certify", help="verify the no-factor certificate of a construction")
    p.add_argument("graph")
    p.add_argument("case", choices=["even", "odd-mid", "odd-succ"])
    add_st(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("sweep", help="constructions and random instances over a k range, as CSV")
    add_st(p)
    p.add_argument("--k", required=True, help="k values, e.g. 2,3 or 2-4")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget-nodes", type=int)
    p.add_argument("--budget-secs", type=float, help="time limit per sweep job")
    p.add_argument("--timing", action="store_true", help="record elapsed_ms")
    add_out(p)

    p = sub.add_parser("random", help="seeded random balanced bipartite graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float)
    p.add_argument("--floor", type=int, default=0, help="minimum degree to reach")
    p.add_argument("--seed", type=int)
    add_format(p)
    add_out(p)

    p = sub.add_parser("stats", help="degree and density summary")
    p.add_argument("graph")
    add_st(p, required=False)
    return parser


def _pick(flag, fallback):
    return fallback if flag is None else flag


def _budget(args, config: dict) -> SearchBudget:
    solver = config.get("solver", {})
    return SearchBudget(
        node_limit=_pick(getattr(args, "budget_nodes", None), solver.get("node_limit")),
        time_limit=_pick(getattr(args, "budget_secs", None), solver.get("time_limit")),
    )


def _tiler_config(args, config: dict) -> TilerConfig:
    tiler = config.get("tiler", {})
    return TilerConfig(
        alpha=_pick(getattr(args, "alpha", None), tiler.get("alpha", 0.01)),
        fallback_n_cap=tiler.get("fallback_n_cap", 40),
        fallback_budget=_budget(args, config),
    )


def run(args, config: dict) -> CommandResult:
    fmt = getattr(args, "format", None) or config.get("output", {}).get("format", "bge")
    if args.command == "construct":
        return cmd_construct(args.case, args.s, args.t, args.k, args.m, args.p, args.q, fmt)
    if args.command == "check":
        return cmd_check(Path(args.graph), args.s, args.t, _budget(args, config))
    if args.command == "tile":
        return cmd_tile(Path(args.graph), args.s, args.t, cfg=_tiler_config(args, config))
    if args.command == "certify":
        return cmd_certify(Path(args.graph), args.case, args.s, args.t, args.k)
    if args.command == "sweep":
        sweep = config.get("sweep", {})
        return cmd_sweep(
            args.s, args.t, parse_ks(args.k),
            trials=_pick(args.trials, sweep.get("trials", 5)),
            seed=_pick(args.seed, sweep.get("seed", 0)),
            density=_pick(args.density, sweep.get("density", 0.5)),
            budget=_budget(args, config),
            cfg=_tiler_config(args, config),
            workers=_pick(args.workers, sweep.get("workers", 1)),
            record_timing=args.timing or bool(sweep.get("record_timing", False)),
        )
    if args.command == "random":
        rand = config.get("random", {})
        return cmd_random(args.n, _pick(args.density, rand.get("density", 0.5)), args.floor,
                          _pick(args.seed, rand.get("seed")), fmt)
    return cmd_stats(Path(args.graph), args.s, args.t)


def emit(result: CommandResult, out: Optional[str]):
    """
    Write the primary text (or the report) to --out or stdout; extras go next to --out.
    Without --out the extras have nowhere to go and are dropped with a warning.
    """
    primary = result.text or (format_report(result.report) if result.report else "")
    if out:
        out_path = Path(out)
        out_path.write_text(primary)
        for suffix, content in result.extras.items():
            out_path.with_name(out_path.name + suffix).write_text(content)
        if result.text and result.report:
            sys.stdout.write(format_report(result.report))
    else:
        if result.extras:
            logger.warning(f"No --out given, not writing {', '.join(sorted(result.extras))}")
        sys.stdout.write(primary)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point. Returns the process exit code."""
    configure_logging(os.getenv("BGTILE_LOG_LEVEL", "INFO"))
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args.config)
        configure_logging(os.getenv("BGTILE_LOG_LEVEL") or config.get("logging", {}).get("level", "INFO"))
        result = run(args, config)
        emit(result, getattr(args, "out", None))
        return EXIT_OK
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except InvariantViolation as e:
        logger.error(f"Internal invariant violated: {e}", exc_info=True)
        return EXIT_INVARIANT
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
