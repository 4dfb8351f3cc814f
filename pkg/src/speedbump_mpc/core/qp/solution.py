from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.core.qp.exceptions import QpIterationLimitError


class QpStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def max(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity)

    def within(self, tolerance: float) -> bool:
        return self.max() <= tolerance


@dataclass(frozen=True, kw_only=True, eq=False)
class QpSolution:
    status: QpStatus
    primal: NDArray[np.float64]
    ineq_duals: NDArray[np.float64]
    eq_duals: NDArray[np.float64]
    lower_duals: NDArray[np.float64]
    upper_duals: NDArray[np.float64]
    objective: float
    iterations: int
    kkt: KktResiduals
    # max row/box violation the problem cannot get below; 0 unless infeasible
    infeasibility: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == QpStatus.OPTIMAL

    def raise_for_iteration_limit(self) -> None:
        if self.status == QpStatus.ITERATION_LIMIT:
            raise QpIterationLimitError(self.iterations)
