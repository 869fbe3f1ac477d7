"""Command-line entry point: ``python -m kdv_mkdv_lab.engine.main --config run.yaml``."""

import argparse
import logging
import sys
from typing import List, Optional

from .commands import run
from .errors import LabError
from .run_config import apply_overrides, load_config

logger = logging.getLogger("kdv-lab")


def _tau(value: str):
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tau must be a number or 'auto', got '{value}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdv-lab",
        description="Closed-form solutions, Darboux checks and finite-difference runs "
        "for coupled KdV-MKdV systems.",
    )
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--h", type=float, default=None, help="override grid.h")
    parser.add_argument("--tau", type=_tau, default=None, help="override time.tau (number or 'auto')")
    parser.add_argument("--t-end", type=float, default=None, dest="t_end", help="override time.t_end")
    parser.add_argument("--long-format", action="store_true", default=None, help="write one long CSV")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, h=args.h, tau=args.tau, t_end=args.t_end, long_format=args.long_format)
    except LabError as exc:
        logger.error(f"invalid configuration: {exc.message}")
        return exc.exit_code

    outcome = run(cfg)
    for path in outcome.files:
        logger.debug(f"wrote {path}")
    if outcome.exit_code != 0:
        logger.error(f"{cfg.subcommand} exited with status {outcome.exit_code}: {outcome.message}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
