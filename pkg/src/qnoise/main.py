"""qnoise command-line entry point."""
from __future__ import annotations

import argparse
import json
import logging
import logging.config
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from qnoise import __version__
from qnoise.commands import (
    cmd_average,
    cmd_evolve,
    cmd_final_state,
    cmd_rate_fit,
    cmd_regime_check,
)
from qnoise.config import ExperimentConfig, load_config
from qnoise.errors import ConfigError, LabError
from qnoise.paths import LOGGER_CONFIG
from qnoise.validate import cmd_validate

_logger = logging.getLogger(__name__)

COMMANDS: dict[str, Callable[[ExperimentConfig], list[Path]]] = {
    "evolve": cmd_evolve,
    "average": cmd_average,
    "final-state": cmd_final_state,
    "rate-fit": cmd_rate_fit,
    "regime-check": cmd_regime_check,
}


def configure_logging(verbose: bool = False, config_path: Path = LOGGER_CONFIG) -> None:
    """Configure the root logger from the dictConfig file, if it exists."""
    try:
        logging.config.dictConfig(json.loads(config_path.read_text()))
    except (OSError, ValueError):
        logging.basicConfig(
            format="%(asctime)s %(levelname)s %(name)s -> %(message)s",
            level=logging.INFO,
        )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logging.getLogger("qnoise").setLevel(logging.DEBUG)


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnoise",
        description="Decoherence of a qubit under a random, time-independent "
        "Hamiltonian.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in [*COMMANDS, "validate"]:
        sub = subparsers.add_parser(name)
        sub.add_argument(
            "--config",
            type=Path,
            required=name != "validate",
            help="experiment config (JSON)",
        )
        sub.add_argument("--out", help="output directory, overrides the config")
        sub.add_argument("--seed", type=int, help="overrides the config seed")
        sub.add_argument("--threads", type=int, help="worker threads")
        sub.add_argument("--verbose", action="store_true", help="log at DEBUG")
    return parser


def _run_command(args: argparse.Namespace) -> int:
    if args.command == "validate":
        return cmd_validate()

    config = load_config(args.config).with_overrides(
        seed=args.seed,
        out=args.out,
        threads=args.threads,
    )
    _logger.info("Running %s with %s", args.command, args.config)
    paths = COMMANDS[args.command](config)
    _logger.info(
        "Finished %s: %d files in %s",
        args.command,
        len(paths),
        config.out_dir,
    )
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return _run_command(args)
    except ConfigError as ex:
        _logger.error("Invalid config: %s", ex)  # noqa: TRY400
        print(f"qnoise: config error: {ex}", file=sys.stderr)  # noqa: T201
        return ex.exit_code
    except LabError as ex:
        _logger.error("%s: %s", type(ex).__name__, ex)  # noqa: TRY400
        print(f"qnoise: {type(ex).__name__}: {ex}", file=sys.stderr)  # noqa: T201
        return ex.exit_code


def run() -> None:
    sys.exit(main())
