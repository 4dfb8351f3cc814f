from unittest import TestCase

import numpy as np
from scipy import sparse

from speedbump_mpc.domain.problem import MiqpProblem, QpProblem, VariableLayout
from tests.fixtures import clamped_quadratic
from tests.utils import AssertMixin


class VariableLayoutTests(TestCase):
    def test_counts_without_turning(self) -> None:
        variables = VariableLayout(1, human_behavior_mode=False)
        self.assertEqual(variables.n_continuous, 14)
        self.assertEqual(variables.n_binary, 6)
        self.assertEqual(variables.n_total, 20)

    def test_counts_with_turning(self) -> None:
        variables = VariableLayout(1, human_behavior_mode=True)
        self.assertEqual(variables.n_continuous, 14)
        self.assertEqual(variables.n_binary, 12)
        self.assertEqual(variables.n_total, 26)

    def test_count_formulas(self) -> None:
        for horizon_n in range(1, 31):
            for mode in (False, True):
                with self.subTest(horizon_n=horizon_n, mode=mode):
                    variables = VariableLayout(horizon_n, mode)
                    per_step = 6 if mode else 3
                    self.assertEqual(
                        variables.n_continuous, 6 * (horizon_n + 1) + 2 * horizon_n
                    )
                    self.assertEqual(variables.n_binary, per_step * (horizon_n + 1))

    def test_columns_are_a_bijection(self) -> None:
        variables = VariableLayout(4, human_behavior_mode=True)
        columns = []
        for k in range(5):
            columns += variables.state_columns(k) + variables.binary_columns(k)
            if k < 4:
                columns += variables.control_columns(k)
        self.assertEqual(sorted(columns), list(range(variables.n_total)))

    def test_continuous_block_precedes_binary_block(self) -> None:
        variables = VariableLayout(3, human_behavior_mode=False)
        binaries = variables.binary_columns()
        self.assertEqual(min(binaries), variables.n_continuous)
        self.assertEqual(variables.columns("delta1"), binaries[0::3])

    def test_step_order(self) -> None:
        variables = VariableLayout(2, human_behavior_mode=False)
        self.assertEqual(variables.state_columns(0), [0, 1, 2, 3, 4, 5])
        self.assertEqual(variables.control_columns(0), [6, 7])
        self.assertEqual(variables.column(1, "x"), 8)
        self.assertEqual(variables.columns("jx"), [6, 14])

    def test_deterministic(self) -> None:
        self.assertEqual(VariableLayout(5, True), VariableLayout(5, True))
        self.assertNotEqual(VariableLayout(5, True), VariableLayout(5, False))
        self.assertEqual(
            repr(VariableLayout(1, False)),
            "VariableLayout(horizon_n=1, human_behavior_mode=False, n_total=20)",
        )


class QpProblemTests(AssertMixin, TestCase):
    def test_objective_includes_offset(self) -> None:
        problem = clamped_quadratic()
        self.assertAlmostEqual(problem.objective(np.array([5.0])), 25.0)
        self.assertAlmostEqual(problem.objective(np.array([10.0])), 0.0)

    def test_dense_inputs_are_converted(self) -> None:
        problem = QpProblem(
            h_matrix=[[2.0, 0.0], [0.0, 2.0]],
            h_vec=[0.0, 0.0],
            g_matrix=[],
            g_vec=[],
            f_matrix=[[1.0, 1.0]],
            f_vec=[1.0],
            lb=[0.0, 0.0],
            ub=[1.0, 1.0],
        )
        self.assertTrue(sparse.issparse(problem.h_matrix))
        self.assertEqual(problem.g_matrix.shape, (0, 2))
        self.assertEqual(
            (problem.n, problem.m_inequality, problem.m_equality), (2, 0, 1)
        )

    def test_with_bounds_keeps_original(self) -> None:
        problem = clamped_quadratic()
        narrowed = problem.with_bounds(np.array([0.0]), np.array([1.0]))
        self.assertVectorAlmostEqual(narrowed.ub, [1.0])
        self.assertVectorAlmostEqual(problem.ub, [20.0])


class MiqpProblemTests(AssertMixin, TestCase):
    def _problem(self, lb: list[float], ub: list[float]) -> MiqpProblem:
        return MiqpProblem(
            h_matrix=sparse.csr_matrix((2, 2)),
            h_vec=np.zeros(2),
            g_matrix=sparse.csr_matrix((0, 2)),
            g_vec=np.zeros(0),
            f_matrix=sparse.csr_matrix((0, 2)),
            f_vec=np.zeros(0),
            lb=np.array(lb),
            ub=np.array(ub),
            integer_set=(1,),
        )

    def test_integer_columns_must_be_boxed_in_unit_interval(self) -> None:
        with self.assertRaises(ValueError):
            self._problem([0.0, 0.0], [1.0, 2.0])

    def test_with_fixed(self) -> None:
        problem = self._problem([-1.0, 0.0], [1.0, 1.0])
        fixed = problem.with_fixed([1], [1.0])
        self.assertVectorAlmostEqual(fixed.lb, [-1.0, 1.0])
        self.assertVectorAlmostEqual(fixed.ub, [1.0, 1.0])
        self.assertEqual(fixed.integer_set, (1,))

    def test_relaxation_drops_integrality(self) -> None:
        relaxation = self._problem([-1.0, 0.0], [1.0, 1.0]).relaxation()
        self.assertNotIsInstance(relaxation, MiqpProblem)
        self.assertEqual(relaxation.n, 2)
