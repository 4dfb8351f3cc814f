import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.core.qp.solution import KktResiduals, QpSolution
from speedbump_mpc.domain.problem import QpProblem


def _max_or_zero(values: NDArray[np.float64]) -> float:
    return float(values.max()) if values.size else 0.0


def kkt_residuals_of(
    problem: QpProblem,
    primal: NDArray[np.float64],
    ineq_duals: NDArray[np.float64],
    eq_duals: NDArray[np.float64],
    lower_duals: NDArray[np.float64],
    upper_duals: NDArray[np.float64],
) -> KktResiduals:
    """Infinity-norm residuals of the KKT conditions at the given primal/dual point.

    Multipliers of ≤ rows and of both box sides must be nonnegative; any negative part
    is counted as stationarity error.
    """
    z = primal
    gradient = (
        problem.h_matrix @ z
        + problem.h_vec
        + problem.g_matrix.T @ ineq_duals
        + problem.f_matrix.T @ eq_duals
        - lower_duals
        + upper_duals
    )
    sign_violation = max(
        _max_or_zero(-ineq_duals),
        _max_or_zero(-lower_duals),
        _max_or_zero(-upper_duals),
    )
    stationarity = max(_max_or_zero(np.abs(gradient)), sign_violation)

    row_slack = problem.g_vec - problem.g_matrix @ z
    lower_slack = z - problem.lb
    upper_slack = problem.ub - z
    primal_violation = max(
        _max_or_zero(-row_slack),
        _max_or_zero(np.abs(problem.f_matrix @ z - problem.f_vec)),
        _max_or_zero(-lower_slack),
        _max_or_zero(-upper_slack),
        0.0,
    )
    complementarity = max(
        _max_or_zero(np.abs(ineq_duals * row_slack)),
        _max_or_zero(np.abs(lower_duals * lower_slack)),
        _max_or_zero(np.abs(upper_duals * upper_slack)),
    )
    return KktResiduals(
        stationarity=max(stationarity, 0.0),
        primal=primal_violation,
        complementarity=complementarity,
    )


def kkt_residuals(problem: QpProblem, solution: QpSolution) -> KktResiduals:
    return kkt_residuals_of(
        problem,
        solution.primal,
        solution.ineq_duals,
        solution.eq_duals,
        solution.lower_duals,
        solution.upper_duals,
    )
