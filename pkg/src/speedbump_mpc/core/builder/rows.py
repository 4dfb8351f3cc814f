from collections.abc import Mapping

import numpy as np
from numpy.typing import NDArray
from scipy import sparse


class ConstraintRows:
    """Accumulates linear rows in triplet form and emits a CSR matrix."""

    _rows: list[int]
    _cols: list[int]
    _vals: list[float]
    _rhs: list[float]

    def __init__(self) -> None:
        self._rows = []
        self._cols = []
        self._vals = []
        self._rhs = []

    def __len__(self) -> int:
        return len(self._rhs)

    def add(self, coefficients: Mapping[int, float], rhs: float) -> None:
        row = len(self._rhs)
        for column, value in coefficients.items():
            if value != 0.0:
                self._rows.append(row)
                self._cols.append(column)
                self._vals.append(float(value))
        self._rhs.append(float(rhs))

    def extend(self, other: "ConstraintRows") -> None:
        offset = len(self._rhs)
        self._rows.extend(row + offset for row in other._rows)
        self._cols.extend(other._cols)
        self._vals.extend(other._vals)
        self._rhs.extend(other._rhs)

    def build(self, n_columns: int) -> tuple[sparse.csr_matrix, NDArray[np.float64]]:
        matrix = sparse.coo_matrix(
            (self._vals, (self._rows, self._cols)),
            shape=(len(self._rhs), n_columns),
            dtype=np.float64,
        ).tocsr()
        return matrix, np.array(self._rhs, dtype=np.float64)
