from pathlib import Path

import numpy as np
from scipy import sparse

from speedbump_mpc.domain.problem import MiqpProblem, QpProblem
from speedbump_mpc.domain.scenario import Scenario, Weights
from speedbump_mpc.domain.trajectory import (
    BinaryActivations,
    SolveStats,
    Trajectory,
    TrajectoryRecord,
)
from speedbump_mpc.domain.vehicle import ControlInput, VehicleState

SCENARIOS_DIR = Path(__file__).resolve().parents[2] / "scenarios"

TABLE1_WEIGHTS = Weights(q1=1.0, q2=1.0, q3=1.0, q4=2.0, q5=4.0, r1=4.0, r2=4.0)


def table1_scenario(**changes) -> Scenario:
    scenario = Scenario(
        dt=0.1,
        horizon_n=30,
        sim_steps=200,
        road_width=2.0,
        x0=0.0,
        y0=0.75,
        vx0=10.0,
        vy0=0.0,
        v_ref=10.0,
        y_ref=0.75,
        bump_start=30.0,
        bump_end=35.0,
        v_max_bump=5.0,
        v_turn=0.1,
        wheelbase=2.7,
        weights=TABLE1_WEIGHTS,
    )
    return scenario.with_changes(**changes) if changes else scenario


TABLE1_TEXT = """\
dt = 0.1
horizon_n = 30
sim_steps = 200
road_width = 2.0
x0 = 0
y0 = 0.75
vx0 = 10
vy0 = 0
v_ref = 10
y_ref = 0.75
bump_start = 30
bump_end = 35
v_max_bump = 5
v_turn = 0.1
wheelbase = 2.7
q1 = 1
q2 = 1
q3 = 1
q4 = 2
q5 = 4
r1 = 4
r2 = 4
"""


def clamped_quadratic(upper: float = 5.0, lower: float = -20.0) -> QpProblem:
    """(v - 10)^2 with v <= upper as an inequality row, offset 100 included."""
    return QpProblem(
        h_matrix=sparse.csr_matrix([[2.0]]),
        h_vec=np.array([-20.0]),
        g_matrix=sparse.csr_matrix([[1.0]]),
        g_vec=np.array([upper]),
        f_matrix=sparse.csr_matrix((0, 1)),
        f_vec=np.zeros(0),
        lb=np.array([lower]),
        ub=np.array([20.0]),
        objective_offset=100.0,
    )


def two_binary_miqp(d0_cost: float = 1.5, d1_cost: float = 2.0) -> MiqpProblem:
    """min (c - 2.5)^2 + d0_cost d0 + d1_cost d1  s.t.  c <= 1 + d0 + d1.

    With the default costs the best assignment is d0 = 1, d1 = 0 (c = 2, objective
    1.75) while the relaxation stops at d0 = 0.75 with objective 1.6875.
    """
    return MiqpProblem(
        h_matrix=sparse.diags([2.0, 0.0, 0.0], format="csr"),
        h_vec=np.array([-5.0, d0_cost, d1_cost]),
        g_matrix=sparse.csr_matrix([[1.0, -1.0, -1.0]]),
        g_vec=np.array([1.0]),
        f_matrix=sparse.csr_matrix((0, 3)),
        f_vec=np.zeros(0),
        lb=np.array([-5.0, 0.0, 0.0]),
        ub=np.array([5.0, 1.0, 1.0]),
        objective_offset=6.25,
        integer_set=(1, 2),
    )


def contradictory_logic_miqp() -> MiqpProblem:
    """delta3 <= delta1 with delta3 pinned to 1 and delta1 pinned to 0."""
    return MiqpProblem(
        h_matrix=sparse.csr_matrix((2, 2)),
        h_vec=np.zeros(2),
        g_matrix=sparse.csr_matrix([[-1.0, 1.0]]),
        g_vec=np.zeros(1),
        f_matrix=sparse.csr_matrix((0, 2)),
        f_vec=np.zeros(0),
        lb=np.array([0.0, 1.0]),
        ub=np.array([0.0, 1.0]),
        integer_set=(0, 1),
    )


def sample_trajectory(human_behavior_mode: bool = False) -> Trajectory:
    """Two hand-written steps, the second one on the bump."""
    turning = {"turn_left": 0, "turn_right": 1, "is_turning": 1}
    records = []
    for k, (x, vx, jx) in enumerate(((29.5, 5.25, -2.5), (30.0, 4.75, 0.0))):
        flags = {"delta1": k, "delta2": 1, "delta3": k}
        if human_behavior_mode:
            flags.update(turning)
        records.append(
            TrajectoryRecord(
                k=k,
                t=0.1 * k,
                state=VehicleState(x=x, y=0.75, vx=vx, vy=-0.125, ax=-0.5, ay=0.0),
                control=ControlInput(jx=jx, jy=1.0 / 3.0),
                activations=BinaryActivations(**flags),
                stats=SolveStats(status="optimal", solve_time=0.0125, nodes_explored=3),
            )
        )
    final_state = VehicleState(x=30.5, y=0.75, vx=4.5, vy=0.0, ax=0.0, ay=0.0)
    return Trajectory(dt=0.1, records=records, final_state=final_state)
