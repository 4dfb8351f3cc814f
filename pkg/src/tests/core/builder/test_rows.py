from unittest import TestCase

import numpy as np

from speedbump_mpc.core.builder.rows import ConstraintRows


class ConstraintRowsTests(TestCase):
    def test_build(self) -> None:
        rows = ConstraintRows()
        rows.add({0: 1.0, 2: -2.0}, 3.0)
        rows.add({1: 0.0}, -1.0)
        matrix, rhs = rows.build(3)
        self.assertEqual(matrix.shape, (2, 3))
        self.assertEqual(matrix.nnz, 2)
        self.assertTrue(np.array_equal(matrix.toarray(), [[1, 0, -2], [0, 0, 0]]))
        self.assertTrue(np.array_equal(rhs, [3.0, -1.0]))

    def test_extend_offsets_rows(self) -> None:
        first = ConstraintRows()
        first.add({0: 1.0}, 1.0)
        second = ConstraintRows()
        second.add({1: 4.0}, 2.0)
        first.extend(second)
        self.assertEqual(len(first), 2)
        matrix, rhs = first.build(2)
        self.assertTrue(np.array_equal(matrix.toarray(), [[1, 0], [0, 4]]))
        self.assertTrue(np.array_equal(rhs, [1.0, 2.0]))

    def test_empty(self) -> None:
        matrix, rhs = ConstraintRows().build(4)
        self.assertEqual(matrix.shape, (0, 4))
        self.assertEqual(rhs.size, 0)
