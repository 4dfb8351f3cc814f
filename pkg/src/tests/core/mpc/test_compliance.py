from unittest import TestCase

from speedbump_mpc.core.mpc.compliance import BUMP_SPEED_TOL, check_trajectory
from speedbump_mpc.core.mpc.exceptions import EmptyTrajectoryError
from speedbump_mpc.domain.trajectory import (
    BinaryActivations,
    SolveStats,
    StepFailure,
    Trajectory,
    TrajectoryRecord,
)
from speedbump_mpc.domain.vehicle import ControlInput, VehicleState
from tests.fixtures import table1_scenario


def make_state(x: float = 0.0, vx: float = 10.0, y: float = 0.75) -> VehicleState:
    return VehicleState(x=x, y=y, vx=vx, vy=0.0, ax=0.0, ay=0.0)


def make_record(
    k: int,
    state: VehicleState,
    control: ControlInput | None = None,
    solve_time: float = 0.01,
) -> TrajectoryRecord:
    return TrajectoryRecord(
        k=k,
        t=0.1 * k,
        state=state,
        control=control or ControlInput(jx=0.0, jy=0.0),
        activations=BinaryActivations(delta1=0, delta2=1, delta3=0),
        stats=SolveStats(status="optimal", solve_time=solve_time, nodes_explored=1),
    )


class CheckTrajectoryTests(TestCase):
    def setUp(self) -> None:
        self.scenario = table1_scenario()

    def test_speed_violation_on_bump(self) -> None:
        trajectory = Trajectory(
            dt=0.1,
            records=[make_record(0, make_state(x=32.0, vx=6.0))],
            final_state=make_state(x=36.0, vx=6.0),
        )
        report = check_trajectory(trajectory, self.scenario)
        self.assertFalse(report.bump_speed_ok)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.worst_bump_violation, 1.0)
        self.assertEqual(report.bump_states, 1)

    def test_final_state_counts(self) -> None:
        trajectory = Trajectory(
            dt=0.1,
            records=[make_record(0, make_state(x=29.0, vx=6.0))],
            final_state=make_state(x=30.5, vx=5.5),
        )
        report = check_trajectory(trajectory, self.scenario)
        self.assertAlmostEqual(report.worst_bump_violation, 0.5)

    def test_tolerance(self) -> None:
        trajectory = Trajectory(
            dt=0.1,
            records=[make_record(0, make_state(x=33.0, vx=5.0 + BUMP_SPEED_TOL / 2))],
        )
        report = check_trajectory(trajectory, self.scenario)
        self.assertTrue(report.bump_speed_ok)
        self.assertGreater(report.worst_bump_violation, 0.0)

    def test_constant_state_at_reference(self) -> None:
        records = [make_record(k, make_state()) for k in range(5)]
        trajectory = Trajectory(dt=0.1, records=records, final_state=make_state())
        report = check_trajectory(trajectory, self.scenario)
        self.assertTrue(report.passed)
        self.assertEqual(report.final_speed_error, 0.0)
        self.assertEqual(report.final_lateral_error, 0.0)
        self.assertEqual(report.max_abs_jx, 0.0)
        self.assertEqual(report.max_abs_jy, 0.0)
        self.assertEqual(report.worst_bump_violation, 0.0)
        self.assertEqual(report.bump_states, 0)
        self.assertEqual(report.steps, 5)

    def test_errors_and_jerk_maxima(self) -> None:
        records = [
            make_record(0, make_state(), ControlInput(jx=-3.0, jy=1.0)),
            make_record(1, make_state(), ControlInput(jx=2.0, jy=-4.0)),
        ]
        trajectory = Trajectory(
            dt=0.1, records=records, final_state=make_state(vx=9.5, y=1.0)
        )
        report = check_trajectory(trajectory, self.scenario)
        self.assertEqual(report.max_abs_jx, 3.0)
        self.assertEqual(report.max_abs_jy, 4.0)
        self.assertAlmostEqual(report.final_speed_error, 0.5)
        self.assertAlmostEqual(report.final_lateral_error, 0.25)

    def test_solve_time_percentiles(self) -> None:
        records = [
            make_record(k, make_state(), solve_time=time)
            for k, time in enumerate((0.01, 0.03, 0.02))
        ]
        report = check_trajectory(
            Trajectory(dt=0.1, records=records), self.scenario
        )
        self.assertAlmostEqual(report.solve_time.p50, 0.02)
        self.assertAlmostEqual(report.solve_time.max, 0.03)
        self.assertLessEqual(report.solve_time.p95, 0.03)

    def test_failed_run_does_not_pass(self) -> None:
        trajectory = Trajectory(
            dt=0.1,
            records=[make_record(0, make_state())],
            failure=StepFailure(k=1, status="infeasible", message="no plan"),
        )
        report = check_trajectory(trajectory, self.scenario)
        self.assertFalse(report.completed)
        self.assertTrue(report.bump_speed_ok)
        self.assertFalse(report.passed)

    def test_empty_trajectory(self) -> None:
        with self.assertRaises(EmptyTrajectoryError):
            check_trajectory(Trajectory(dt=0.1), self.scenario)
