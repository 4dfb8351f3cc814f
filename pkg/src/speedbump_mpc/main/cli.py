import argparse
import logging
from collections.abc import Callable

from speedbump_mpc.adapters.cli.commands import cmd_check, cmd_oracle_compare, cmd_run
from speedbump_mpc.adapters.cli.parser import build_parser
from speedbump_mpc.main.container import create_container


def _run(args: argparse.Namespace) -> int:
    return cmd_run(args).exit_code


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "run": _run,
    "oracle-compare": cmd_oracle_compare,
    "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    di_container = create_container()
    di_container.wire()
    try:
        return COMMANDS[args.command](args)
    finally:
        di_container.unwire()


if __name__ == "__main__":
    raise SystemExit(main())
