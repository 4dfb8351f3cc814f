from pathlib import Path

import pandas as pd

from speedbump_mpc.domain.trajectory import Trajectory, TrajectoryRecord
from speedbump_mpc.utils.formatting import format_float

CSV_SIGNIFICANT_DIGITS = 12
TRAJECTORY_COLUMNS = (
    "k,t,x,y,vx,vy,ax,ay,jx,jy,theta,delta1,delta2,delta3,"
    "turn_left,turn_right,is_turning,status,solve_time_ms,nodes"
).split(",")


def _number(value: float) -> str:
    return format_float(value, CSV_SIGNIFICANT_DIGITS)


def _flag(value: int | None) -> str:
    return "" if value is None else str(value)


def _row(record: TrajectoryRecord, record_timings: bool) -> list[str]:
    state, control, flags = record.state, record.control, record.activations
    solve_time_ms = _number(record.stats.solve_time * 1000.0) if record_timings else ""
    return [
        str(record.k),
        _number(record.t),
        _number(state.x),
        _number(state.y),
        _number(state.vx),
        _number(state.vy),
        _number(state.ax),
        _number(state.ay),
        _number(control.jx),
        _number(control.jy),
        _number(state.theta),
        _flag(flags.delta1),
        _flag(flags.delta2),
        _flag(flags.delta3),
        _flag(flags.turn_left),
        _flag(flags.turn_right),
        _flag(flags.is_turning),
        str(record.stats.status),
        solve_time_ms,
        str(record.stats.nodes_explored),
    ]


def trajectory_frame(trajectory: Trajectory, record_timings: bool) -> pd.DataFrame:
    """One preformatted text cell per value; solve times stay empty unless recorded."""
    rows = [_row(record, record_timings) for record in trajectory.records]
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS, dtype=str)


def write_trajectory_csv(
    trajectory: Trajectory, path: Path, record_timings: bool = False
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(trajectory, record_timings).to_csv(
        path, index=False, lineterminator="\n"
    )
    return path
