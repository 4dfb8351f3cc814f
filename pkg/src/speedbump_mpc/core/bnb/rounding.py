from collections.abc import Collection, Sequence
from dataclasses import dataclass
from functools import cache
from itertools import product

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from speedbump_mpc.domain.problem import MiqpProblem

REPAIR_COMPONENT_CAP = 12
ROW_FEASIBILITY_TOL = 1e-7


@cache
def binary_assignments(n_binaries: int) -> NDArray[np.float64]:
    """All 0/1 vectors of the given length, one per row, in lexicographic order."""
    assignments = list(product((0.0, 1.0), repeat=n_binaries))
    return np.array(assignments, dtype=np.float64).reshape(2**n_binaries, n_binaries)


def most_fractional(
    z: NDArray[np.float64],
    columns: Sequence[int],
    int_tol: float,
    settled: Collection[int] = (),
) -> int | None:
    """Column with the largest distance to {0, 1}; ties go to the lowest column."""
    best_column = None
    best_distance = int_tol
    for column in sorted(columns):
        if column in settled:
            continue
        distance = abs(z[column] - round(z[column]))
        if distance > best_distance:
            best_column, best_distance = column, distance
    return best_column


@dataclass(frozen=True, eq=False)
class BinaryComponent:
    columns: tuple[int, ...]
    rows: NDArray[np.int64]
    row_matrix: sparse.csr_matrix
    # row_matrix restricted to the component columns, dense
    block: NDArray[np.float64]


def binary_components(problem: MiqpProblem) -> list[BinaryComponent]:
    """Groups the binary columns that share an inequality row."""
    columns = np.array(problem.integer_set, dtype=np.int64)
    if columns.size == 0:
        return []
    incidence = abs(problem.g_matrix[:, columns]).tocsr()
    incidence.data[:] = 1.0
    adjacency = (incidence.T @ incidence).tocsr()
    n_groups, labels = connected_components(adjacency, directed=False)
    components = []
    for label in range(n_groups):
        members = columns[labels == label]
        rows = np.flatnonzero(incidence[:, labels == label].getnnz(axis=1) > 0)
        row_matrix = problem.g_matrix[rows]
        components.append(
            BinaryComponent(
                columns=tuple(members.tolist()),
                rows=rows,
                row_matrix=row_matrix,
                block=row_matrix[:, members].toarray(),
            )
        )
    return components


@dataclass(frozen=True)
class RepairResult:
    values: dict[int, float]
    complete: bool


class ComponentRepair:
    """Rounds the binaries of a relaxed point one row-connected group at a time.

    The continuous part is held at its relaxed values. Each small group is
    enumerated and the feasible assignment closest in L1 to the relaxation is kept;
    ties go to the lexicographically lowest assignment.
    """

    _problem: MiqpProblem
    _components: list[BinaryComponent]

    def __init__(self, problem: MiqpProblem) -> None:
        self._problem = problem
        self._components = binary_components(problem)

    @property
    def components(self) -> list[BinaryComponent]:
        return self._components

    def repair(
        self, z: NDArray[np.float64], lb: NDArray[np.float64], ub: NDArray[np.float64]
    ) -> RepairResult:
        values: dict[int, float] = {}
        complete = True
        for component in self._components:
            assignment = self._repair_component(component, z, lb, ub)
            if assignment is None:
                complete = False
                continue
            values.update(zip(component.columns, assignment.tolist()))
        return RepairResult(values=values, complete=complete)

    def _repair_component(
        self,
        component: BinaryComponent,
        z: NDArray[np.float64],
        lb: NDArray[np.float64],
        ub: NDArray[np.float64],
    ) -> NDArray[np.float64] | None:
        columns = list(component.columns)
        if len(columns) > REPAIR_COMPONENT_CAP:
            return None
        candidates = binary_assignments(len(columns))
        within_box = np.all(
            (candidates >= lb[columns]) & (candidates <= ub[columns]), axis=1
        )
        candidates = candidates[within_box]
        if candidates.size == 0:
            return None
        if component.rows.size:
            base = z.copy()
            base[columns] = 0.0
            slack = (
                self._problem.g_vec[component.rows] - component.row_matrix @ base
            )
            lhs = candidates @ component.block.T
            tolerance = ROW_FEASIBILITY_TOL * np.maximum(1.0, np.abs(slack))
            candidates = candidates[np.all(lhs <= slack + tolerance, axis=1)]
            if candidates.size == 0:
                return None
        distance = np.abs(candidates - z[columns]).sum(axis=1)
        return candidates[int(np.argmin(distance))]


def pure_binary_rows(problem: MiqpProblem) -> NDArray[np.int64]:
    """Inequality rows whose nonzeros all sit on binary columns."""
    is_binary = np.zeros(problem.n, dtype=bool)
    is_binary[list(problem.integer_set)] = True
    g_matrix = sparse.csr_matrix(problem.g_matrix)
    g_matrix.eliminate_zeros()
    rows = []
    for row in range(g_matrix.shape[0]):
        row_columns = g_matrix.indices[g_matrix.indptr[row] : g_matrix.indptr[row + 1]]
        if row_columns.size and np.all(is_binary[row_columns]):
            rows.append(row)
    return np.array(rows, dtype=np.int64)
