import os
from collections.abc import Sequence, Sized

import numpy as np
from numpy.typing import ArrayLike

from speedbump_mpc.domain.scenario import ScenarioViolation

SLOW_TESTS_ENABLED = os.environ.get("SPEEDBUMP_MPC_SLOW_TESTS") == "1"
SLOW_TESTS_REASON = "set SPEEDBUMP_MPC_SLOW_TESTS=1 to run closed-loop acceptance runs"


class AssertMixin:
    def assertEmpty(self, sized: Sized) -> None:
        self.assertEqual(len(sized), 0)

    def assertNotEmpty(self, sized: Sized) -> None:
        self.assertGreater(len(sized), 0)

    def assertVectorAlmostEqual(
        self, actual: ArrayLike, expected: ArrayLike, tol: float = 1e-9
    ) -> None:
        actual_array = np.asarray(actual, dtype=np.float64)
        expected_array = np.asarray(expected, dtype=np.float64)
        self.assertEqual(actual_array.shape, expected_array.shape)
        worst = float(np.max(np.abs(actual_array - expected_array), initial=0.0))
        if worst > tol:
            self.fail(f"vectors differ by {worst:g} (tolerance {tol:g})")

    def assertViolationFound(
        self, violations: Sequence[ScenarioViolation], field: str
    ) -> None:
        fields = [violation.field for violation in violations]
        if field not in fields:
            self.fail(f"no violation for {field!r} in {fields}")
