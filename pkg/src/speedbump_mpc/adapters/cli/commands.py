import argparse
import logging
import sys
from contextlib import ExitStack
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import TextIO

from dependency_injector.wiring import Provide, inject

from speedbump_mpc.adapters.cli.parser import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_SOLVER_FAILURE,
)
from speedbump_mpc.adapters.export.plot_data import write_plot_data
from speedbump_mpc.adapters.export.problem_dump import write_problem_dump
from speedbump_mpc.adapters.export.report_json import (
    oracle_report,
    run_outcome,
    run_report,
    write_report,
)
from speedbump_mpc.adapters.export.trace_log import SolverTraceWriter
from speedbump_mpc.adapters.export.trajectory_csv import write_trajectory_csv
from speedbump_mpc.adapters.scenario_file.exceptions import ScenarioFileError
from speedbump_mpc.adapters.scenario_file.parser import (
    ScenarioFileParser,
    parse_scenario,
    read_scenario_text,
)
from speedbump_mpc.core.bnb.exceptions import NodeSolveError, OracleCapExceededError
from speedbump_mpc.core.builder.exceptions import BigMTooSmallError, LayoutError
from speedbump_mpc.core.events.registry import SolverEventHandlerRegistry
from speedbump_mpc.core.experiments.commands import (
    OracleCompareService,
    RunScenarioResult,
    RunScenarioService,
    ScenarioOverrides,
)
from speedbump_mpc.core.experiments.exceptions import OracleHorizonError
from speedbump_mpc.core.qp.exceptions import QpIterationLimitError
from speedbump_mpc.domain.problem import MiqpProblem
from speedbump_mpc.domain.scenario import InvalidScenarioError, Scenario, validate
from speedbump_mpc.utils.formatting import format_float

logger = logging.getLogger(__name__)

CONFIG_ERRORS = (
    OSError,
    UnicodeDecodeError,
    ScenarioFileError,
    InvalidScenarioError,
    BigMTooSmallError,
    LayoutError,
    OracleHorizonError,
    OracleCapExceededError,
)
SOLVER_ERRORS = (NodeSolveError, QpIterationLimitError)

TRAJECTORY_FILE = "trajectory.csv"
REPORT_FILE = "report.json"
PLOT_FILE = "plot.csv"


@dataclass(frozen=True, kw_only=True)
class RunArtifacts:
    exit_code: int
    trajectory_path: Path | None = None
    report_path: Path | None = None
    plot_path: Path | None = None
    trace_path: Path | None = None


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _number(value: float) -> str:
    return format_float(value, 6)


def _load_scenario(path: Path, overrides: ScenarioOverrides) -> Scenario:
    return overrides.apply(parse_scenario(read_scenario_text(path)))


def _open_trace(
    stack: ExitStack, path: Path | None, registry: SolverEventHandlerRegistry
) -> SolverTraceWriter | None:
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    stream: TextIO = stack.enter_context(path.open("w", encoding="utf-8"))
    trace = SolverTraceWriter(stream)
    trace.register(registry)
    stack.callback(trace.unregister, registry)
    return trace


class _StepObserver:
    _trace: SolverTraceWriter | None
    _dump_path: Path | None

    def __init__(self, trace: SolverTraceWriter | None, dump_path: Path | None) -> None:
        self._trace = trace
        self._dump_path = dump_path

    def __call__(self, k: int, problem: MiqpProblem) -> None:
        if self._trace is not None:
            self._trace.begin_section("step", k)
        if k == 0 and self._dump_path is not None:
            write_problem_dump(problem, self._dump_path)
            logger.info("Wrote the step 0 problem to %s", self._dump_path)


def _run_summary(name: str, result: RunScenarioResult) -> str:
    scenario, trajectory, report = result.scenario, result.trajectory, result.report
    parts = [
        f"{name}: {run_outcome(result)}",
        f"steps={len(trajectory)}/{scenario.sim_steps}",
    ]
    if report is not None:
        parts += [
            f"bump_speed_ok={str(report.bump_speed_ok).lower()}",
            f"worst_bump_violation={_number(report.worst_bump_violation)}",
            f"final_speed_error={_number(report.final_speed_error)}",
            f"final_lateral_error={_number(report.final_lateral_error)}",
        ]
    return " ".join(parts)


def _run_exit_code(result: RunScenarioResult) -> int:
    failure = result.trajectory.failure
    if failure is not None:
        _error(f"solver failure at step {failure.k}: {failure.message}")
        return EXIT_SOLVER_FAILURE
    assert result.report is not None
    if not result.report.passed:
        _error(
            "bump speed limit exceeded by "
            f"{_number(result.report.worst_bump_violation)} m/s"
        )
        return EXIT_CHECK_FAILED
    return EXIT_OK


@inject
def cmd_run(
    args: argparse.Namespace,
    run_scenario_service: RunScenarioService = Provide["run_scenario_service"],
    registry: SolverEventHandlerRegistry = Provide["solver_event_handler_registry"],
) -> RunArtifacts:
    overrides = ScenarioOverrides(
        human_behavior_mode=args.human_behavior,
        strict_indicators=args.strict_indicators,
        horizon_n=args.horizon,
        sim_steps=args.sim_steps,
    )
    with ExitStack() as stack:
        try:
            scenario = _load_scenario(args.scenario, overrides)
            trace = _open_trace(stack, args.trace_path, registry)
            observer = _StepObserver(trace, args.dump_problem_path)
            result = run_scenario_service.run(scenario, observer)
        except CONFIG_ERRORS as err:
            _error(str(err))
            return RunArtifacts(exit_code=EXIT_CONFIG_ERROR)
        except SOLVER_ERRORS as err:
            _error(str(err))
            return RunArtifacts(exit_code=EXIT_SOLVER_FAILURE)

    output_dir: Path = args.output_dir
    name = args.scenario.stem
    trajectory_path = write_trajectory_csv(
        result.trajectory, output_dir / TRAJECTORY_FILE, args.record_timings
    )
    plot_path = write_plot_data(result.trajectory, output_dir / PLOT_FILE)
    report_path = write_report(
        run_report(result, name, args.record_timings), output_dir / REPORT_FILE
    )
    if args.record_timings and result.report is not None:
        logger.info(
            "Solve time p50 %.1f ms, p95 %.1f ms, max %.1f ms",
            result.report.solve_time.p50 * 1000.0,
            result.report.solve_time.p95 * 1000.0,
            result.report.solve_time.max * 1000.0,
        )
    print(_run_summary(name, result))
    return RunArtifacts(
        exit_code=_run_exit_code(result),
        trajectory_path=trajectory_path,
        report_path=report_path,
        plot_path=plot_path,
        trace_path=args.trace_path,
    )


@inject
def cmd_oracle_compare(
    args: argparse.Namespace,
    oracle_compare_service: OracleCompareService = Provide["oracle_compare_service"],
    registry: SolverEventHandlerRegistry = Provide["solver_event_handler_registry"],
) -> int:
    if args.trials < 0:
        _error(f"--trials must be non-negative, got {args.trials}")
        return EXIT_CONFIG_ERROR
    overrides = ScenarioOverrides(
        human_behavior_mode=args.human_behavior,
        strict_indicators=args.strict_indicators,
        horizon_n=args.horizon,
    )
    with ExitStack() as stack:
        try:
            scenario = _load_scenario(args.scenario, overrides)
            trace = _open_trace(stack, args.trace_path, registry)
            observer = None
            if trace is not None:
                observer = partial(trace.begin_section, "trial")
            result = oracle_compare_service.compare(
                scenario, args.trials, args.seed, observer
            )
        except CONFIG_ERRORS as err:
            _error(str(err))
            return EXIT_CONFIG_ERROR
        except SOLVER_ERRORS as err:
            _error(str(err))
            return EXIT_SOLVER_FAILURE

    print(
        f"oracle-compare seed={result.seed} horizon={result.horizon_n} "
        f"binaries={result.n_binaries} trials={len(result.trials)}"
    )
    for trial in result.trials:
        print(
            f"trial={trial.trial} x0={_number(trial.x0)} vx0={_number(trial.vx0)} "
            f"bnb={format_float(trial.bnb_objective, 12)} ({trial.bnb_status}, "
            f"{trial.bnb_nodes} nodes) "
            f"oracle={format_float(trial.oracle_objective, 12)} "
            f"({trial.oracle_status}) gap={format_float(trial.gap, 3)}"
        )
    passed = str(result.passed).lower()
    print(f"max_gap={format_float(result.max_gap, 3)} passed={passed}")
    if args.report_path is not None:
        write_report(oracle_report(result, args.scenario.stem), args.report_path)
    if not result.passed:
        _error(f"branch-and-bound and enumeration disagree by {result.max_gap:.3g}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


@inject
def cmd_check(
    args: argparse.Namespace,
    parser: ScenarioFileParser = Provide["scenario_file_parser"],
) -> int:
    try:
        scenario = parser.parse(read_scenario_text(args.scenario))
    except CONFIG_ERRORS as err:
        _error(str(err))
        return EXIT_CONFIG_ERROR
    violations = validate(scenario)
    for violation in violations:
        print(f"{violation.field}: {violation.message}")
    if violations:
        _error(f"{args.scenario} has {len(violations)} problem(s)")
        return EXIT_CHECK_FAILED
    print(f"{args.scenario}: ok")
    return EXIT_OK
