import logging
from collections.abc import Callable

import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.core.bnb.config import BnbConfig
from speedbump_mpc.core.bnb.exceptions import NodeSolveError
from speedbump_mpc.core.bnb.solver import (
    BranchAndBoundSolver,
    MiqpSolution,
    MiqpStatus,
)
from speedbump_mpc.core.builder.decode import activations_at, control_at
from speedbump_mpc.core.builder.miqp import assemble, check_big_m
from speedbump_mpc.core.events.dispatcher import SolverEventDispatcher
from speedbump_mpc.core.qp.solver import QpSolver
from speedbump_mpc.domain.problem import MiqpProblem, VariableLayout
from speedbump_mpc.domain.scenario import Scenario
from speedbump_mpc.domain.trajectory import (
    SolveStats,
    StepFailure,
    Trajectory,
    TrajectoryRecord,
)
from speedbump_mpc.domain.vehicle import VehicleState, build_step_matrices, propagate

logger = logging.getLogger(__name__)

ProblemObserver = Callable[[int, MiqpProblem], None]


def shift_solution(
    variables: VariableLayout, z: NDArray[np.float64], dt: float
) -> NDArray[np.float64]:
    """Previous horizon solution advanced by one step.

    States and jerks move one step earlier; the last state is extended with zero
    jerk, the last jerk becomes zero and the last binaries are repeated.
    """
    n = variables.horizon_n
    shifted = np.zeros_like(z)
    for k in range(n):
        shifted[variables.state_columns(k)] = z[variables.state_columns(k + 1)]
        shifted[variables.binary_columns(k)] = z[variables.binary_columns(k + 1)]
    for k in range(n - 1):
        shifted[variables.control_columns(k)] = z[variables.control_columns(k + 1)]
    a_block = build_step_matrices(dt).a_block
    shifted[variables.state_columns(n)] = a_block @ z[variables.state_columns(n)]
    shifted[variables.binary_columns(n)] = z[variables.binary_columns(n)]
    return shifted


class MpcSimulationService:
    """Receding-horizon loop: assemble, solve, apply the first jerk, propagate."""

    _bnb_solver: BranchAndBoundSolver

    def __init__(self, bnb_solver: BranchAndBoundSolver) -> None:
        self._bnb_solver = bnb_solver

    def run(
        self, scenario: Scenario, problem_observer: ProblemObserver | None = None
    ) -> Trajectory:
        check_big_m(scenario)
        trajectory = Trajectory(dt=scenario.dt)
        state = scenario.initial_state()
        warm_start: NDArray[np.float64] | None = None
        for k in range(scenario.sim_steps):
            problem = assemble(scenario, state)
            if problem_observer is not None:
                problem_observer(k, problem)
            try:
                solution = self._bnb_solver.solve(problem, warm_start=warm_start)
            except NodeSolveError as err:
                trajectory.failure = StepFailure(
                    k=k, status=err.status, message=str(err)
                )
                break
            if solution.primal is None:
                trajectory.failure = StepFailure(
                    k=k,
                    status=solution.status,
                    message=f"no binary-feasible plan at step {k} ({solution.status})",
                )
                break
            record = self._record(k, scenario, problem, solution, state)
            trajectory.records.append(record)
            self._log_step(record)
            state = propagate(state, record.control, scenario.dt)
            assert problem.layout is not None
            warm_start = shift_solution(problem.layout, solution.primal, scenario.dt)
        trajectory.final_state = state
        if trajectory.failure is not None:
            logger.info(
                "MPC stopped at step %d: %s",
                trajectory.failure.k,
                trajectory.failure.message,
            )
        return trajectory

    def _record(
        self,
        k: int,
        scenario: Scenario,
        problem: MiqpProblem,
        solution: MiqpSolution,
        state: VehicleState,
    ) -> TrajectoryRecord:
        assert problem.layout is not None and solution.primal is not None
        return TrajectoryRecord(
            k=k,
            t=k * scenario.dt,
            state=state,
            control=control_at(problem.layout, solution.primal, 0),
            activations=activations_at(problem.layout, solution.primal, 0),
            stats=SolveStats(
                status=solution.status,
                solve_time=solution.solve_time,
                nodes_explored=solution.nodes_explored,
            ),
        )

    def _log_step(self, record: TrajectoryRecord) -> None:
        status = record.stats.status
        level = logging.WARNING if status == MiqpStatus.NODE_LIMIT else logging.INFO
        logger.log(
            level,
            "step %d: x=%.3f vx=%.3f y=%.3f jx=%.3f jy=%.3f delta=%d%d%d %s (%d nodes)",
            record.k,
            record.state.x,
            record.state.vx,
            record.state.y,
            record.control.jx,
            record.control.jy,
            record.activations.delta1,
            record.activations.delta2,
            record.activations.delta3,
            status,
            record.stats.nodes_explored,
        )


def run_mpc(
    scenario: Scenario,
    bnb_config: BnbConfig | None = None,
    qp_solver: QpSolver | None = None,
    dispatcher: SolverEventDispatcher | None = None,
) -> Trajectory:
    bnb_solver = BranchAndBoundSolver(
        qp_solver or QpSolver(), bnb_config or BnbConfig(), dispatcher
    )
    return MpcSimulationService(bnb_solver).run(scenario)
