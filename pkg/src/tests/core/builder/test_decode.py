from unittest import TestCase

import numpy as np

from speedbump_mpc.core.builder.decode import activations_at, control_at
from speedbump_mpc.domain.problem import VariableLayout


class DecodeTests(TestCase):
    def setUp(self) -> None:
        self.variables = VariableLayout(2, human_behavior_mode=True)
        self.z = np.arange(self.variables.n_total, dtype=np.float64)

    def test_control_at(self) -> None:
        control = control_at(self.variables, self.z, 0)
        self.assertEqual((control.jx, control.jy), (6.0, 7.0))

    def test_activations_are_rounded(self) -> None:
        z = np.zeros(self.variables.n_total)
        z[self.variables.column(2, "delta1")] = 0.9999997
        z[self.variables.column(2, "is_turning")] = 1e-7
        z[self.variables.column(2, "turn_left")] = 1.0
        activations = activations_at(self.variables, z, 2)
        self.assertEqual(activations.delta1, 1)
        self.assertEqual(activations.delta2, 0)
        self.assertEqual(activations.turn_left, 1)
        self.assertEqual(activations.is_turning, 0)

    def test_turning_fields_absent_without_human_mode(self) -> None:
        variables = VariableLayout(1, human_behavior_mode=False)
        activations = activations_at(variables, np.ones(variables.n_total), 0)
        self.assertEqual((activations.delta1, activations.delta3), (1, 1))
        self.assertIsNone(activations.turn_left)
        self.assertIsNone(activations.is_turning)
