from collections.abc import Sequence
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from speedbump_mpc.domain.scenario import CONTROL_COMPONENTS, STATE_COMPONENTS
from speedbump_mpc.utils.formatting import format_callable_call

BUMP_BINARIES = ("delta1", "delta2", "delta3")
TURN_BINARIES = ("turn_left", "turn_right", "is_turning")


class VariableLayout:
    """Column map of the sparse (non-condensed) horizon problem.

    Continuous block first, step by step: the six states of step k followed by the two
    jerks of step k (no jerks at k = N). The binary block follows, again step by step.
    """

    _horizon_n: int
    _human_behavior_mode: bool
    _index: dict[tuple[int, str], int]
    _names: list[tuple[int, str]]
    _n_continuous: int

    def __init__(self, horizon_n: int, human_behavior_mode: bool) -> None:
        self._horizon_n = horizon_n
        self._human_behavior_mode = human_behavior_mode
        self._index = {}
        self._names = []
        for k in range(horizon_n + 1):
            for name in STATE_COMPONENTS:
                self._add(k, name)
            if k < horizon_n:
                for name in CONTROL_COMPONENTS:
                    self._add(k, name)
        self._n_continuous = len(self._names)
        for k in range(horizon_n + 1):
            for name in self.binary_names:
                self._add(k, name)

    def _add(self, k: int, name: str) -> None:
        self._index[(k, name)] = len(self._names)
        self._names.append((k, name))

    def __repr__(self) -> str:
        return format_callable_call(
            "VariableLayout",
            horizon_n=self._horizon_n,
            human_behavior_mode=self._human_behavior_mode,
            n_total=self.n_total,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VariableLayout):
            return False
        return (self._horizon_n, self._human_behavior_mode) == (
            other.horizon_n,
            other.human_behavior_mode,
        )

    def __hash__(self) -> int:
        return hash((self._horizon_n, self._human_behavior_mode))

    @property
    def horizon_n(self) -> int:
        return self._horizon_n

    @property
    def human_behavior_mode(self) -> bool:
        return self._human_behavior_mode

    @property
    def binary_names(self) -> tuple[str, ...]:
        if self._human_behavior_mode:
            return BUMP_BINARIES + TURN_BINARIES
        return BUMP_BINARIES

    @property
    def n_continuous(self) -> int:
        return self._n_continuous

    @property
    def n_binary(self) -> int:
        return len(self._names) - self._n_continuous

    @property
    def n_total(self) -> int:
        return len(self._names)

    def column(self, k: int, name: str) -> int:
        return self._index[(k, name)]

    def columns(self, name: str) -> list[int]:
        """Column of `name` at every step where it exists, in step order."""
        return [
            self._index[(k, name)]
            for k in range(self._horizon_n + 1)
            if (k, name) in self._index
        ]

    def state_columns(self, k: int) -> list[int]:
        return [self._index[(k, name)] for name in STATE_COMPONENTS]

    def control_columns(self, k: int) -> list[int]:
        return [self._index[(k, name)] for name in CONTROL_COMPONENTS]

    def binary_columns(self, k: int | None = None) -> list[int]:
        if k is None:
            return list(range(self._n_continuous, self.n_total))
        return [self._index[(k, name)] for name in self.binary_names]


def _as_csr(matrix: ArrayLike | sparse.spmatrix, n_columns: int) -> sparse.csr_matrix:
    if sparse.issparse(matrix):
        return sparse.csr_matrix(matrix, dtype=np.float64)
    dense = np.asarray(matrix, dtype=np.float64)
    if dense.size == 0:
        return sparse.csr_matrix((0, n_columns), dtype=np.float64)
    return sparse.csr_matrix(np.atleast_2d(dense))


def _as_vector(values: ArrayLike) -> NDArray[np.float64]:
    return np.array(values, dtype=np.float64).reshape(-1)


@dataclass(frozen=True, kw_only=True, eq=False)
class QpProblem:
    """min ½zᵀHz + hᵀz + offset  s.t.  Gz ≤ g,  Fz = f,  lb ≤ z ≤ ub."""

    h_matrix: sparse.csr_matrix
    h_vec: NDArray[np.float64]
    g_matrix: sparse.csr_matrix
    g_vec: NDArray[np.float64]
    f_matrix: sparse.csr_matrix
    f_vec: NDArray[np.float64]
    lb: NDArray[np.float64]
    ub: NDArray[np.float64]
    objective_offset: float = 0.0

    def __post_init__(self) -> None:
        h_vec = _as_vector(self.h_vec)
        n = h_vec.size
        object.__setattr__(self, "h_vec", h_vec)
        object.__setattr__(self, "h_matrix", _as_csr(self.h_matrix, n))
        object.__setattr__(self, "g_matrix", _as_csr(self.g_matrix, n))
        object.__setattr__(self, "g_vec", _as_vector(self.g_vec))
        object.__setattr__(self, "f_matrix", _as_csr(self.f_matrix, n))
        object.__setattr__(self, "f_vec", _as_vector(self.f_vec))
        object.__setattr__(self, "lb", _as_vector(self.lb))
        object.__setattr__(self, "ub", _as_vector(self.ub))

    @property
    def n(self) -> int:
        return int(self.h_vec.size)

    @property
    def m_inequality(self) -> int:
        return int(self.g_matrix.shape[0])

    @property
    def m_equality(self) -> int:
        return int(self.f_matrix.shape[0])

    def objective(self, z: NDArray[np.float64]) -> float:
        return float(
            0.5 * z @ (self.h_matrix @ z) + self.h_vec @ z + self.objective_offset
        )

    def with_bounds(self, lb: NDArray[np.float64], ub: NDArray[np.float64]) -> Self:
        return replace(self, lb=lb, ub=ub)

    def __repr__(self) -> str:
        return format_callable_call(
            type(self).__name__,
            n=self.n,
            m_inequality=self.m_inequality,
            m_equality=self.m_equality,
        )


@dataclass(frozen=True, kw_only=True, eq=False)
class MiqpProblem(QpProblem):
    integer_set: tuple[int, ...] = dataclass_field(default_factory=tuple)
    layout: VariableLayout | None = None

    def __post_init__(self) -> None:
        super().__post_init__()
        integer_set = tuple(int(column) for column in self.integer_set)
        object.__setattr__(self, "integer_set", integer_set)
        if integer_set:
            columns = list(integer_set)
            if np.any(self.lb[columns] < 0.0) or np.any(self.ub[columns] > 1.0):
                raise ValueError("Integer columns must be boxed inside [0, 1]")

    def relaxation(self) -> QpProblem:
        return QpProblem(
            h_matrix=self.h_matrix,
            h_vec=self.h_vec,
            g_matrix=self.g_matrix,
            g_vec=self.g_vec,
            f_matrix=self.f_matrix,
            f_vec=self.f_vec,
            lb=self.lb,
            ub=self.ub,
            objective_offset=self.objective_offset,
        )

    def with_fixed(self, columns: Sequence[int], values: Sequence[float]) -> Self:
        lb = self.lb.copy()
        ub = self.ub.copy()
        lb[list(columns)] = values
        ub[list(columns)] = values
        return self.with_bounds(lb, ub)
