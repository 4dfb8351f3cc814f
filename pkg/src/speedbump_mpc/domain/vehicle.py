from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import block_diag

# Below this longitudinal speed the heading is frozen (vy/vx is meaningless).
HEADING_SPEED_FLOOR = 0.1


@dataclass(frozen=True, kw_only=True)
class VehicleState:
    x: float
    y: float
    vx: float
    vy: float
    ax: float
    ay: float
    theta: float = 0.0

    def kinematic_vector(self) -> NDArray[np.float64]:
        """The six optimised components in block order (x, vx, ax, y, vy, ay)."""
        return np.array([self.x, self.vx, self.ax, self.y, self.vy, self.ay])


@dataclass(frozen=True, kw_only=True)
class ControlInput:
    jx: float
    jy: float

    def vector(self) -> NDArray[np.float64]:
        return np.array([self.jx, self.jy])


@dataclass(frozen=True, eq=False)
class StepMatrices:
    a_d: NDArray[np.float64]
    b_d: NDArray[np.float64]
    a_block: NDArray[np.float64]
    b_block: NDArray[np.float64]


def _check_dt(dt: float) -> None:
    if not dt > 0:
        raise ValueError(f"Time step must be positive, got {dt!r}")


def build_step_matrices(dt: float) -> StepMatrices:
    """Exact zero-order-hold discretisation of a triple integrator driven by jerk."""
    _check_dt(dt)
    a_d = np.array(
        [
            [1.0, dt, dt * dt / 2.0],
            [0.0, 1.0, dt],
            [0.0, 0.0, 1.0],
        ]
    )
    b_d = np.array([[dt * dt * dt / 6.0], [dt * dt / 2.0], [dt]])
    return StepMatrices(
        a_d=a_d,
        b_d=b_d,
        a_block=block_diag(a_d, a_d),
        b_block=block_diag(b_d, b_d),
    )


def update_heading(theta: float, vx: float, vy: float, dt: float) -> float:
    _check_dt(dt)
    if vx < HEADING_SPEED_FLOOR:
        return theta
    return theta + dt * (vy / vx)


def propagate(state: VehicleState, control: ControlInput, dt: float) -> VehicleState:
    _check_dt(dt)
    dt2 = dt * dt / 2.0
    dt3 = dt * dt * dt / 6.0
    return VehicleState(
        x=state.x + state.vx * dt + state.ax * dt2 + control.jx * dt3,
        y=state.y + state.vy * dt + state.ay * dt2 + control.jy * dt3,
        vx=state.vx + state.ax * dt + control.jx * dt2,
        vy=state.vy + state.ay * dt + control.jy * dt2,
        ax=state.ax + control.jx * dt,
        ay=state.ay + control.jy * dt,
        theta=update_heading(state.theta, state.vx, state.vy, dt),
    )
