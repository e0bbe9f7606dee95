import argparse
import logging
from typing import Optional, Sequence

from .commands.mf import cmd_mf
from .commands.oscillator import cmd_oscillator
from .commands.ttm import cmd_ttm
from .commands.verify import cmd_verify
from .dependencies import PRESETS, get_settings, load_run_config
from .errors import EXIT_CONFIG, ConfigError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwork",
        description="Quantum work statistics: two-time measurement and measurement-free paradigms",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a sectioned run-config file")
    common.add_argument("--out", help="Directory to write report files")
    common.add_argument("--seed", type=int, help="Seed for random models and verify instances")
    common.add_argument("--log-level", help="Logging level (default from QWORK_LOG_LEVEL)")

    subparsers.add_parser("ttm", parents=[common], help="Two-time measurement work distribution")
    subparsers.add_parser("mf", parents=[common], help="Measurement-free work distribution")
    oscillator = subparsers.add_parser(
        "oscillator", parents=[common], help="Parametric oscillator figure sweep"
    )
    oscillator.add_argument("--preset", choices=sorted(PRESETS), help="Named parameter set")
    oscillator.add_argument(
        "--cross-check",
        action="store_true",
        help="Compare closed forms against truncated-Fock numerics",
    )
    subparsers.add_parser("verify", parents=[common], help="Identity suite over random protocols")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        level = (args.log_level or get_settings().log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigError(f"unknown log level {level!r}", field="--log-level")
        logging.basicConfig(
            level=level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        config = load_run_config(
            args.config,
            out=args.out,
            seed=args.seed,
            preset=getattr(args, "preset", None),
        )
    except (ConfigError, ValueError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG

    logger.info("Running %s", args.command)
    if args.command == "ttm":
        return cmd_ttm(config)
    if args.command == "mf":
        return cmd_mf(config)
    if args.command == "oscillator":
        return cmd_oscillator(config, cross_check=args.cross_check)
    return cmd_verify(config)
