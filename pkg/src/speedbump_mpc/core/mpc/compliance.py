from dataclasses import dataclass

import numpy as np

from speedbump_mpc.core.mpc.exceptions import EmptyTrajectoryError
from speedbump_mpc.domain.scenario import Scenario
from speedbump_mpc.domain.trajectory import Trajectory

BUMP_SPEED_TOL = 1e-3


@dataclass(frozen=True, kw_only=True)
class SolveTimeSummary:
    p50: float
    p95: float
    max: float


@dataclass(frozen=True, kw_only=True)
class ComplianceReport:
    steps: int
    completed: bool
    bump_speed_ok: bool
    # largest vx − v_max_bump over states on the bump, 0 when none exceeds the cap
    worst_bump_violation: float
    bump_states: int
    max_abs_jx: float
    max_abs_jy: float
    final_speed_error: float
    final_lateral_error: float
    solve_time: SolveTimeSummary

    @property
    def passed(self) -> bool:
        return self.completed and self.bump_speed_ok


def check_trajectory(trajectory: Trajectory, scenario: Scenario) -> ComplianceReport:
    if not trajectory.records:
        raise EmptyTrajectoryError("Trajectory has no applied steps")
    states = trajectory.applied_states()
    on_bump = [
        state for state in states if scenario.bump_start <= state.x <= scenario.bump_end
    ]
    worst = max([state.vx - scenario.v_max_bump for state in on_bump] + [0.0])
    final = states[-1]
    times = np.array([record.stats.solve_time for record in trajectory.records])
    return ComplianceReport(
        steps=len(trajectory.records),
        completed=trajectory.succeeded,
        bump_speed_ok=worst <= BUMP_SPEED_TOL,
        worst_bump_violation=worst,
        bump_states=len(on_bump),
        max_abs_jx=max(abs(record.control.jx) for record in trajectory.records),
        max_abs_jy=max(abs(record.control.jy) for record in trajectory.records),
        final_speed_error=abs(final.vx - scenario.v_ref),
        final_lateral_error=abs(final.y - scenario.y_ref),
        solve_time=SolveTimeSummary(
            p50=float(np.percentile(times, 50)),
            p95=float(np.percentile(times, 95)),
            max=float(times.max()),
        ),
    )
