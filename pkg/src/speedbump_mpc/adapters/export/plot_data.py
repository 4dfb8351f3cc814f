from pathlib import Path

import pandas as pd

from speedbump_mpc.adapters.export.trajectory_csv import CSV_SIGNIFICANT_DIGITS
from speedbump_mpc.domain.trajectory import Trajectory
from speedbump_mpc.utils.formatting import format_float

PLOT_COLUMNS = ["t", "x", "y", "vx", "vy", "ax", "ay", "jx", "jy"]


def plot_frame(trajectory: Trajectory) -> pd.DataFrame:
    rows = []
    for record in trajectory.records:
        state, control = record.state, record.control
        values = (
            record.t,
            state.x,
            state.y,
            state.vx,
            state.vy,
            state.ax,
            state.ay,
            control.jx,
            control.jy,
        )
        rows.append([format_float(value, CSV_SIGNIFICANT_DIGITS) for value in values])
    return pd.DataFrame(rows, columns=PLOT_COLUMNS, dtype=str)


def write_plot_data(trajectory: Trajectory, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    plot_frame(trajectory).to_csv(path, index=False, lineterminator="\n")
    return path
