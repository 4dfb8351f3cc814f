import logging
from dataclasses import dataclass
from math import tan

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from speedbump_mpc.core.builder.exceptions import BigMTooSmallError, LayoutError
from speedbump_mpc.core.builder.rows import ConstraintRows
from speedbump_mpc.domain.problem import MiqpProblem, VariableLayout
from speedbump_mpc.domain.scenario import CONTROL_COMPONENTS, STATE_COMPONENTS, Scenario
from speedbump_mpc.domain.vehicle import VehicleState, build_step_matrices

logger = logging.getLogger(__name__)

Rows = tuple[sparse.csr_matrix, NDArray[np.float64]]


def layout(horizon_n: int, human_behavior_mode: bool) -> VariableLayout:
    if horizon_n < 1:
        raise LayoutError(f"Horizon must contain at least one step, got {horizon_n}")
    return VariableLayout(horizon_n, human_behavior_mode)


def build_objective(scenario: Scenario, variables: VariableLayout) -> Rows:
    """Diagonal H and linear h of the tracking cost in the ½zᵀHz + hᵀz convention.

    Stage costs run over k = 0..N−1. The constant N·(q1·v_ref² + q3·y_ref²)
    is left out, see `dropped_constant`.
    """
    weights = scenario.weights
    stage = {
        "vx": weights.q1,
        "ax": weights.q2,
        "y": weights.q3,
        "vy": weights.q4,
        "ay": weights.q5,
        "jx": weights.r1,
        "jy": weights.r2,
    }
    diagonal = np.zeros(variables.n_total)
    h_vec = np.zeros(variables.n_total)
    for k in range(variables.horizon_n):
        for name, weight in stage.items():
            diagonal[variables.column(k, name)] = 2.0 * weight
        h_vec[variables.column(k, "vx")] = -2.0 * weights.q1 * scenario.v_ref
        h_vec[variables.column(k, "y")] = -2.0 * weights.q3 * scenario.y_ref
    return sparse.diags(diagonal, format="csr"), h_vec


def dropped_constant(scenario: Scenario) -> float:
    weights = scenario.weights
    per_step = weights.q1 * scenario.v_ref**2 + weights.q3 * scenario.y_ref**2
    return per_step * scenario.horizon_n


def build_dynamics_constraints(
    x0_state: VehicleState, scenario: Scenario, variables: VariableLayout
) -> Rows:
    matrices = build_step_matrices(scenario.dt)
    rows = ConstraintRows()
    for column, value in zip(variables.state_columns(0), x0_state.kinematic_vector()):
        rows.add({column: 1.0}, value)
    for k in range(variables.horizon_n):
        current = variables.state_columns(k)
        following = variables.state_columns(k + 1)
        controls = variables.control_columns(k)
        for i, next_column in enumerate(following):
            coefficients = {next_column: 1.0}
            for j, column in enumerate(current):
                coefficients[column] = -matrices.a_block[i, j]
            for j, column in enumerate(controls):
                coefficients[column] = -matrices.b_block[i, j]
            rows.add(coefficients, 0.0)
    return rows.build(variables.n_total)


def build_bounds(
    scenario: Scenario, variables: VariableLayout
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    lb = np.zeros(variables.n_total)
    ub = np.ones(variables.n_total)
    lane_low, lane_high = scenario.lane_bounds()
    for name in STATE_COMPONENTS + CONTROL_COMPONENTS:
        lower, upper = scenario.limits.bounds(name)
        if name == "y":
            lower, upper = max(lower, lane_low), min(upper, lane_high)
        columns = variables.columns(name)
        lb[columns] = lower
        ub[columns] = upper
    return lb, ub


def _nonholonomic_rows(scenario: Scenario, variables: VariableLayout) -> ConstraintRows:
    rows = ConstraintRows()
    tan_max = tan(scenario.theta_max)
    tan_min = tan(scenario.theta_min)
    for k in range(variables.horizon_n + 1):
        vx = variables.column(k, "vx")
        vy = variables.column(k, "vy")
        ay = variables.column(k, "ay")
        rows.add({vy: 1.0, vx: -tan_max}, 0.0)
        rows.add({vy: -1.0, vx: tan_min}, 0.0)
        rows.add({ay: 1.0, vx: -scenario.omega_max}, 0.0)
        rows.add({ay: -1.0, vx: -scenario.omega_max}, 0.0)
    return rows


def build_nonholonomic(scenario: Scenario, variables: VariableLayout) -> Rows:
    return _nonholonomic_rows(scenario, variables).build(variables.n_total)


@dataclass(frozen=True)
class EncodingRange:
    """Values an indicator-encoded variable can take over a whole run."""

    variable: str
    lower: float
    upper: float


def encoding_ranges(scenario: Scenario) -> dict[str, EncodingRange]:
    limits = scenario.limits
    dt = scenario.dt
    dt2 = dt * dt / 2.0
    dt3 = dt * dt * dt / 6.0
    step_high = limits.vx_max * dt + limits.ax_max * dt2 + limits.jx_max * dt3
    step_low = limits.vx_min * dt + limits.ax_min * dt2 + limits.jx_min * dt3
    steps = scenario.sim_steps + scenario.horizon_n
    x_lower = max(limits.x_min, scenario.x0 + steps * min(step_low, 0.0))
    x_upper = min(limits.x_max, scenario.x0 + steps * max(step_high, 0.0))
    return {
        "x": EncodingRange("x", x_lower, x_upper),
        "vx": EncodingRange("vx", limits.vx_min, limits.vx_max),
        "vy": EncodingRange("vy", limits.vy_min, limits.vy_max),
    }


def _required_big_m(scenario: Scenario) -> list[tuple[str, float]]:
    """Smallest M per indicator for which every relaxed row is vacuous on its range."""
    ranges = encoding_ranges(scenario)
    x, vx, vy = ranges["x"], ranges["vx"], ranges["vy"]
    eps = scenario.epsilon
    start, end = scenario.bump_start, scenario.bump_end
    required = [
        ("delta1", max(start - x.lower, x.upper - start + eps)),
        ("delta2", max(x.upper - end, end + eps - x.lower)),
        ("delta3", vx.upper - scenario.v_max_bump),
    ]
    if scenario.strict_indicators:
        required.append(("delta3", scenario.v_max_bump + eps - vx.lower))
    if scenario.human_behavior_mode:
        v_turn = scenario.v_turn
        left = max(v_turn - vy.lower, vy.upper - v_turn + eps)
        right = max(vy.upper + v_turn, eps - v_turn - vy.lower)
        required += [("turn_left", left), ("turn_right", right)]
    return required


def check_big_m(scenario: Scenario) -> None:
    for variable, required in _required_big_m(scenario):
        if scenario.big_m < required:
            raise BigMTooSmallError(variable, required, scenario.big_m)


def _bump_rows(scenario: Scenario, variables: VariableLayout) -> ConstraintRows:
    rows = ConstraintRows()
    big_m = scenario.big_m
    eps = scenario.epsilon
    for k in range(variables.horizon_n + 1):
        x = variables.column(k, "x")
        vx = variables.column(k, "vx")
        d1 = variables.column(k, "delta1")
        d2 = variables.column(k, "delta2")
        d3 = variables.column(k, "delta3")
        # delta1 <=> x >= bump_start
        rows.add({x: -1.0, d1: big_m}, big_m - scenario.bump_start)
        rows.add({x: 1.0, d1: -big_m}, scenario.bump_start - eps)
        # delta2 <=> x <= bump_end
        rows.add({x: 1.0, d2: big_m}, scenario.bump_end + big_m)
        rows.add({x: -1.0, d2: -big_m}, -scenario.bump_end - eps)
        # delta3 => vx <= v_max_bump
        rows.add({vx: 1.0, d3: big_m}, scenario.v_max_bump + big_m)
        if scenario.strict_indicators:
            rows.add({vx: -1.0, d3: -big_m}, -scenario.v_max_bump - eps)
        rows.add({d3: 1.0, d1: -1.0}, 0.0)
        rows.add({d3: 1.0, d2: -1.0}, 0.0)
        rows.add({d1: 1.0, d2: 1.0, d3: -1.0}, 1.0)
        if variables.human_behavior_mode:
            _add_turning_rows(rows, scenario, variables, k)
    return rows


def _add_turning_rows(
    rows: ConstraintRows, scenario: Scenario, variables: VariableLayout, k: int
) -> None:
    big_m = scenario.big_m
    eps = scenario.epsilon
    v_turn = scenario.v_turn
    vy = variables.column(k, "vy")
    left = variables.column(k, "turn_left")
    right = variables.column(k, "turn_right")
    turning = variables.column(k, "is_turning")
    # turn_left <=> vy >= v_turn
    rows.add({vy: -1.0, left: big_m}, big_m - v_turn)
    rows.add({vy: 1.0, left: -big_m}, v_turn - eps)
    # turn_right <=> vy <= -v_turn
    rows.add({vy: 1.0, right: big_m}, big_m - v_turn)
    rows.add({vy: -1.0, right: -big_m}, v_turn - eps)
    rows.add({left: 1.0, turning: -1.0}, 0.0)
    rows.add({right: 1.0, turning: -1.0}, 0.0)
    rows.add({turning: 1.0, left: -1.0, right: -1.0}, 0.0)
    # on the bump the vehicle must be turning
    rows.add(
        {
            variables.column(k, "delta1"): 1.0,
            variables.column(k, "delta2"): 1.0,
            turning: -1.0,
        },
        1.0,
    )


def build_bump_logic(
    scenario: Scenario, variables: VariableLayout
) -> tuple[sparse.csr_matrix, NDArray[np.float64], tuple[int, ...]]:
    check_big_m(scenario)
    g_matrix, g_vec = _bump_rows(scenario, variables).build(variables.n_total)
    return g_matrix, g_vec, tuple(variables.binary_columns())


def assemble(scenario: Scenario, x0_state: VehicleState) -> MiqpProblem:
    variables = layout(scenario.horizon_n, scenario.human_behavior_mode)
    check_big_m(scenario)
    h_matrix, h_vec = build_objective(scenario, variables)
    f_matrix, f_vec = build_dynamics_constraints(x0_state, scenario, variables)
    lb, ub = build_bounds(scenario, variables)
    inequalities = _nonholonomic_rows(scenario, variables)
    inequalities.extend(_bump_rows(scenario, variables))
    g_matrix, g_vec = inequalities.build(variables.n_total)
    logger.debug(
        "Assembled MIQP: %d columns (%d binary), %d equalities, %d inequalities",
        variables.n_total,
        variables.n_binary,
        f_matrix.shape[0],
        g_matrix.shape[0],
    )
    return MiqpProblem(
        h_matrix=h_matrix,
        h_vec=h_vec,
        g_matrix=g_matrix,
        g_vec=g_vec,
        f_matrix=f_matrix,
        f_vec=f_vec,
        lb=lb,
        ub=ub,
        integer_set=tuple(variables.binary_columns()),
        layout=variables,
    )
