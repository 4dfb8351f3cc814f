from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import TestCase, skipUnless

import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.adapters.export.trajectory_csv import write_trajectory_csv
from speedbump_mpc.core.bnb.config import BnbConfig
from speedbump_mpc.core.bnb.solver import BranchAndBoundSolver
from speedbump_mpc.core.builder.exceptions import BigMTooSmallError
from speedbump_mpc.core.builder.miqp import assemble
from speedbump_mpc.core.mpc.compliance import check_trajectory
from speedbump_mpc.core.mpc.simulation import (
    MpcSimulationService,
    run_mpc,
    shift_solution,
)
from speedbump_mpc.core.qp.kkt import kkt_residuals
from speedbump_mpc.core.qp.solution import KktResiduals, QpSolution
from speedbump_mpc.core.qp.solver import QpSolver
from speedbump_mpc.domain.problem import QpProblem, VariableLayout
from speedbump_mpc.domain.scenario import Limits
from speedbump_mpc.domain.trajectory import Trajectory
from speedbump_mpc.domain.vehicle import propagate
from tests.fixtures import table1_scenario
from tests.utils import SLOW_TESTS_ENABLED, SLOW_TESTS_REASON, AssertMixin


class ShiftSolutionTests(AssertMixin, TestCase):
    def setUp(self) -> None:
        self.variables = VariableLayout(2, human_behavior_mode=False)
        self.z = np.arange(self.variables.n_total, dtype=np.float64)
        self.shifted = shift_solution(self.variables, self.z, 0.1)

    def test_states_move_one_step_earlier(self) -> None:
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.state_columns(0)],
            self.z[self.variables.state_columns(1)],
            0.0,
        )
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.state_columns(1)],
            self.z[self.variables.state_columns(2)],
            0.0,
        )

    def test_controls_move_and_last_is_zero(self) -> None:
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.control_columns(0)],
            self.z[self.variables.control_columns(1)],
            0.0,
        )
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.control_columns(1)], [0.0, 0.0], 0.0
        )

    def test_last_state_coasts(self) -> None:
        x, vx, ax = self.z[self.variables.state_columns(2)][:3]
        shifted_last = self.shifted[self.variables.state_columns(2)]
        self.assertAlmostEqual(shifted_last[0], x + 0.1 * vx + 0.005 * ax)
        self.assertAlmostEqual(shifted_last[1], vx + 0.1 * ax)
        self.assertAlmostEqual(shifted_last[2], ax)

    def test_binaries_shift_and_repeat(self) -> None:
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.binary_columns(1)],
            self.z[self.variables.binary_columns(2)],
            0.0,
        )
        self.assertVectorAlmostEqual(
            self.shifted[self.variables.binary_columns(2)],
            self.z[self.variables.binary_columns(2)],
            0.0,
        )


class MpcSimulationServiceTests(AssertMixin, TestCase):
    def setUp(self) -> None:
        bnb_solver = BranchAndBoundSolver(QpSolver(), BnbConfig())
        self.service = MpcSimulationService(bnb_solver)

    def test_short_run_away_from_bump(self) -> None:
        scenario = table1_scenario(horizon_n=3, sim_steps=6)
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        self.assertEqual(len(trajectory), 6)
        self.assertEqual([record.k for record in trajectory.records], list(range(6)))
        times = [record.t for record in trajectory.records]
        self.assertVectorAlmostEqual(np.diff(times), np.full(5, 0.1), 1e-12)
        self.assertEqual(trajectory.records[0].state, scenario.initial_state())
        # already at the reference, nothing to correct
        for record in trajectory.records:
            self.assertAlmostEqual(record.state.vx, 10.0, places=4)
            self.assertAlmostEqual(record.state.y, 0.75, places=4)
            self.assertEqual(record.activations.delta1, 0)
            self.assertEqual(record.activations.delta2, 1)

    def test_logged_controls_reproduce_states(self) -> None:
        scenario = table1_scenario(horizon_n=3, sim_steps=8, x0=26.0, vx0=5.1)
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        states = trajectory.applied_states()
        for record, following in zip(trajectory.records, states[1:]):
            replayed = propagate(record.state, record.control, scenario.dt)
            self.assertVectorAlmostEqual(
                replayed.kinematic_vector(), following.kinematic_vector(), 1e-10
            )
            self.assertAlmostEqual(replayed.theta, following.theta, places=10)

    def test_slows_down_for_close_bump(self) -> None:
        scenario = table1_scenario(horizon_n=3, sim_steps=10, x0=29.0, vx0=5.1)
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        report = check_trajectory(trajectory, scenario)
        self.assertGreater(report.bump_states, 0)
        self.assertTrue(report.bump_speed_ok)
        for record in trajectory.records:
            if 30.0 <= record.state.x <= 35.0:
                self.assertEqual(record.activations.delta3, 1)

    def test_infeasible_first_step(self) -> None:
        scenario = table1_scenario(horizon_n=2, sim_steps=3, x0=32.0, vx0=10.0)
        trajectory = self.service.run(scenario)
        self.assertFalse(trajectory.succeeded)
        self.assertEqual(trajectory.failure.k, 0)
        self.assertEqual(trajectory.failure.status, "infeasible")
        self.assertEqual(len(trajectory), 0)
        self.assertEqual(trajectory.final_state, scenario.initial_state())

    def test_problem_observer_sees_every_step(self) -> None:
        seen = []
        scenario = table1_scenario(horizon_n=2, sim_steps=3)
        self.service.run(scenario, lambda k, problem: seen.append((k, problem.n)))
        n = assemble(scenario, scenario.initial_state()).n
        self.assertEqual(seen, [(0, n), (1, n), (2, n)])

    def test_big_m_checked_before_the_loop(self) -> None:
        with self.assertRaises(BigMTooSmallError):
            self.service.run(table1_scenario(big_m=10.0))

    def test_run_mpc_helper(self) -> None:
        trajectory = run_mpc(table1_scenario(horizon_n=2, sim_steps=2))
        self.assertEqual(len(trajectory), 2)


class CertifyingQpSolver(QpSolver):
    """Recomputes the KKT residuals of every optimal solve."""

    optimal_solves: int
    uncertified: list[KktResiduals]

    def __init__(self) -> None:
        super().__init__()
        self.optimal_solves = 0
        self.uncertified = []

    def solve(
        self, problem: QpProblem, initial_guess: NDArray[np.float64] | None = None
    ) -> QpSolution:
        solution = super().solve(problem, initial_guess)
        if solution.is_optimal:
            self.optimal_solves += 1
            residuals = kkt_residuals(problem, solution)
            if not residuals.within(1e-6):
                self.uncertified.append(residuals)
        return solution


@skipUnless(SLOW_TESTS_ENABLED, SLOW_TESTS_REASON)
class ClosedLoopAcceptanceTests(TestCase):
    qp_solver: CertifyingQpSolver
    service: MpcSimulationService
    table1: Trajectory

    @classmethod
    def setUpClass(cls) -> None:
        cls.qp_solver = CertifyingQpSolver()
        cls.service = MpcSimulationService(
            BranchAndBoundSolver(cls.qp_solver, BnbConfig())
        )
        cls.table1 = cls.service.run(table1_scenario())

    def assertCertified(self) -> None:
        self.assertGreater(self.qp_solver.optimal_solves, 0)
        self.assertEqual(self.qp_solver.uncertified, [])

    def test_table1_respects_bump_speed(self) -> None:
        trajectory = self.table1
        self.assertTrue(trajectory.succeeded)
        self.assertEqual(len(trajectory), 200)
        report = check_trajectory(trajectory, table1_scenario())
        self.assertTrue(report.passed)
        self.assertGreater(report.bump_states, 0)

    def test_table1_reconverges_to_reference(self) -> None:
        final = self.table1.final_state
        self.assertIsNotNone(final)
        self.assertLessEqual(abs(final.vx - 10.0), 0.1)
        self.assertLessEqual(abs(final.y - 0.75), 0.02)

    def test_table1_qps_are_certified(self) -> None:
        self.assertCertified()

    def test_table1_median_solve_time(self) -> None:
        times = [record.stats.solve_time for record in self.table1.records]
        self.assertLessEqual(float(np.median(times)), 1.0)

    def test_table1_csv_is_reproducible(self) -> None:
        second = MpcSimulationService(
            BranchAndBoundSolver(QpSolver(), BnbConfig())
        ).run(table1_scenario())
        with TemporaryDirectory() as tmp:
            first_path = write_trajectory_csv(self.table1, Path(tmp) / "first.csv")
            second_path = write_trajectory_csv(second, Path(tmp) / "second.csv")
            self.assertEqual(first_path.read_bytes(), second_path.read_bytes())

    def test_high_speed_approach_stays_feasible(self) -> None:
        scenario = table1_scenario(vx0=14.0, limits=Limits(ax_min=-5.0))
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        self.assertTrue(check_trajectory(trajectory, scenario).bump_speed_ok)
        self.assertCertified()

    def test_bump_out_of_reach_tracks_reference(self) -> None:
        scenario = table1_scenario(
            bump_start=10000.0,
            bump_end=10005.0,
            big_m=12000.0,
            limits=Limits(x_max=20000.0),
        )
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        for record in trajectory.records[10:]:
            self.assertLess(abs(record.state.vx - 10.0), 0.1)

    def test_human_mode_turns_on_bump(self) -> None:
        scenario = table1_scenario(human_behavior_mode=True)
        trajectory = self.service.run(scenario)
        self.assertTrue(trajectory.succeeded)
        turning = [
            record
            for record in trajectory.records
            if 30.0 <= record.state.x <= 35.0 and abs(record.state.vy) >= 0.1 - 1e-6
        ]
        self.assertNotEqual(turning, [])
        self.assertTrue(check_trajectory(trajectory, scenario).bump_speed_ok)
        self.assertCertified()

    def test_warm_start_never_costs_nodes(self) -> None:
        scenario = table1_scenario(sim_steps=60)
        solver = BranchAndBoundSolver(self.qp_solver, BnbConfig())
        sampled_steps = []
        cold_nodes = []

        def compare(k: int, problem) -> None:
            if k % 6 == 0 and k > 0:
                cold_nodes.append(solver.solve(problem).nodes_explored)
                sampled_steps.append(k)

        trajectory = self.service.run(scenario, compare)
        self.assertEqual(len(cold_nodes), 9)
        warm = {record.k: record.stats.nodes_explored for record in trajectory.records}
        for k, cold in zip(sampled_steps, cold_nodes):
            self.assertLessEqual(warm[k], cold)
