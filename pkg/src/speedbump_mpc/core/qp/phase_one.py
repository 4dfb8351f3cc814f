import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.optimize import linprog

from speedbump_mpc.domain.problem import QpProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PhaseOneResult:
    point: NDArray[np.float64]
    infeasibility: float
    solved: bool


def solve_phase_one(problem: QpProblem) -> PhaseOneResult:
    """Smallest t such that every row holds up to t inside the box (elastic LP)."""
    midpoint = 0.5 * (problem.lb + problem.ub)
    n_rows = problem.m_inequality + 2 * problem.m_equality
    if n_rows == 0:
        return PhaseOneResult(point=midpoint, infeasibility=0.0, solved=True)
    elastic = sparse.csr_matrix(-np.ones((n_rows, 1)))
    a_ub = sparse.vstack(
        [problem.g_matrix, problem.f_matrix, -problem.f_matrix], format="csr"
    )
    a_ub = sparse.hstack([a_ub, elastic], format="csr")
    b_ub = np.concatenate([problem.g_vec, problem.f_vec, -problem.f_vec])
    cost = np.zeros(problem.n + 1)
    cost[-1] = 1.0
    bounds = list(zip(problem.lb, problem.ub)) + [(0.0, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0:
        logger.warning("Phase-one LP did not solve: %s", result.message)
        return PhaseOneResult(point=midpoint, infeasibility=0.0, solved=False)
    point = np.clip(np.asarray(result.x[:-1], dtype=np.float64), problem.lb, problem.ub)
    return PhaseOneResult(
        point=point, infeasibility=max(float(result.x[-1]), 0.0), solved=True
    )
