from pathlib import Path

from pydantic import BaseModel, ConfigDict

from speedbump_mpc.core.experiments.commands import (
    OracleCompareResult,
    RunScenarioResult,
)
from speedbump_mpc.core.mpc.compliance import ComplianceReport

# per-step latency published for the same planner with a commercial solver
PUBLISHED_SOLVE_TIME_RANGE_MS = (10.0, 100.0)


class ReportModel(BaseModel):
    model_config = ConfigDict(frozen=True)


class SolveTimePercentiles(ReportModel):
    p50_ms: float
    p95_ms: float
    max_ms: float


class Compliance(ReportModel):
    passed: bool
    completed: bool
    steps: int
    bump_speed_ok: bool
    worst_bump_violation: float
    bump_states: int
    max_abs_jx: float
    max_abs_jy: float
    final_speed_error: float
    final_lateral_error: float
    solve_time: SolveTimePercentiles | None


class Failure(ReportModel):
    k: int
    status: str
    message: str


class RunReport(ReportModel):
    scenario: str
    outcome: str
    human_behavior_mode: bool
    strict_indicators: bool
    horizon_n: int
    sim_steps: int
    steps_completed: int
    failure: Failure | None
    compliance: Compliance | None
    timings_recorded: bool
    published_solve_time_range_ms: tuple[float, float] = PUBLISHED_SOLVE_TIME_RANGE_MS


class OracleTrialReport(ReportModel):
    trial: int
    x0: float
    vx0: float
    bnb_status: str
    bnb_objective: float
    bnb_nodes: int
    oracle_status: str
    oracle_objective: float
    oracle_solves: int
    gap: float


class OracleReport(ReportModel):
    scenario: str
    seed: int
    horizon_n: int
    n_binaries: int
    max_gap: float
    passed: bool
    trials: list[OracleTrialReport]


def run_outcome(result: RunScenarioResult) -> str:
    if result.solver_failed:
        return "solver_failure"
    return "passed" if result.passed else "compliance_failure"


def _compliance(report: ComplianceReport, record_timings: bool) -> Compliance:
    solve_time = None
    if record_timings:
        solve_time = SolveTimePercentiles(
            p50_ms=report.solve_time.p50 * 1000.0,
            p95_ms=report.solve_time.p95 * 1000.0,
            max_ms=report.solve_time.max * 1000.0,
        )
    return Compliance(
        passed=report.passed,
        completed=report.completed,
        steps=report.steps,
        bump_speed_ok=report.bump_speed_ok,
        worst_bump_violation=report.worst_bump_violation,
        bump_states=report.bump_states,
        max_abs_jx=report.max_abs_jx,
        max_abs_jy=report.max_abs_jy,
        final_speed_error=report.final_speed_error,
        final_lateral_error=report.final_lateral_error,
        solve_time=solve_time,
    )


def run_report(
    result: RunScenarioResult, scenario_name: str, record_timings: bool = False
) -> RunReport:
    """Solve-time percentiles stay null unless timings are recorded, so the document
    is reproducible byte for byte."""
    scenario, trajectory = result.scenario, result.trajectory
    failure = trajectory.failure
    return RunReport(
        scenario=scenario_name,
        outcome=run_outcome(result),
        human_behavior_mode=scenario.human_behavior_mode,
        strict_indicators=scenario.strict_indicators,
        horizon_n=scenario.horizon_n,
        sim_steps=scenario.sim_steps,
        steps_completed=len(trajectory),
        failure=(
            Failure(k=failure.k, status=failure.status, message=failure.message)
            if failure is not None
            else None
        ),
        compliance=(
            _compliance(result.report, record_timings)
            if result.report is not None
            else None
        ),
        timings_recorded=record_timings,
    )


def oracle_report(result: OracleCompareResult, scenario_name: str) -> OracleReport:
    return OracleReport(
        scenario=scenario_name,
        seed=result.seed,
        horizon_n=result.horizon_n,
        n_binaries=result.n_binaries,
        max_gap=result.max_gap,
        passed=result.passed,
        trials=[
            OracleTrialReport(
                trial=trial.trial,
                x0=trial.x0,
                vx0=trial.vx0,
                bnb_status=trial.bnb_status,
                bnb_objective=trial.bnb_objective,
                bnb_nodes=trial.bnb_nodes,
                oracle_status=trial.oracle_status,
                oracle_objective=trial.oracle_objective,
                oracle_solves=trial.oracle_solves,
                gap=trial.gap,
            )
            for trial in result.trials
        ],
    )


def write_report(report: ReportModel, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
