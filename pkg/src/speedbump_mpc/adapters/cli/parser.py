import argparse
from pathlib import Path
from typing import NoReturn

from speedbump_mpc.core.experiments.commands import DEFAULT_ORACLE_SEED

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SOLVER_FAILURE = 2
EXIT_CONFIG_ERROR = 3

DEFAULT_OUTPUT_DIR = Path("out")
DEFAULT_ORACLE_HORIZON = 2
DEFAULT_ORACLE_TRIALS = 50


class CliArgumentParser(argparse.ArgumentParser):
    """Usage errors are configuration errors; exit code 2 means a solver failure."""

    def error(self, message: str) -> NoReturn:
        self.print_usage()
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def _add_mode_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--human-behavior",
        dest="human_behavior",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="override human_behavior_mode from the scenario file",
    )
    parser.add_argument(
        "--strict-indicators",
        dest="strict_indicators",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="override strict_indicators from the scenario file",
    )
    parser.add_argument(
        "--trace",
        dest="trace_path",
        type=Path,
        help=(
            "write a branch-and-bound trace; when the binary repair of a node is "
            "incomplete, its branch column is taken from the binaries the repair "
            "could not settle"
        ),
    )


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="speedbump-mpc",
        description="MIQP model predictive control through a speed bump window.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="simulate a scenario and check it")
    run.add_argument("scenario", type=Path)
    run.add_argument(
        "--output-dir", dest="output_dir", type=Path, default=DEFAULT_OUTPUT_DIR
    )
    _add_mode_flags(run)
    run.add_argument("--horizon", dest="horizon", type=int)
    run.add_argument("--sim-steps", dest="sim_steps", type=int)
    run.add_argument(
        "--record-timings",
        dest="record_timings",
        action="store_true",
        help="write solve times (outputs are no longer reproducible byte for byte)",
    )
    run.add_argument(
        "--dump-problem",
        dest="dump_problem_path",
        type=Path,
        help="write the first step's MIQP as text",
    )

    oracle = subparsers.add_parser(
        "oracle-compare", help="compare branch-and-bound with full enumeration"
    )
    oracle.add_argument("scenario", type=Path)
    _add_mode_flags(oracle)
    oracle.add_argument(
        "--horizon", dest="horizon", type=int, default=DEFAULT_ORACLE_HORIZON
    )
    oracle.add_argument(
        "--trials", dest="trials", type=int, default=DEFAULT_ORACLE_TRIALS
    )
    oracle.add_argument("--seed", dest="seed", type=int, default=DEFAULT_ORACLE_SEED)
    oracle.add_argument("--report", dest="report_path", type=Path)

    check = subparsers.add_parser("check", help="validate a scenario file")
    check.add_argument("scenario", type=Path)
    return parser
