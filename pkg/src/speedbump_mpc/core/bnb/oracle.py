import logging
from math import inf
from time import perf_counter

import numpy as np

from speedbump_mpc.core.bnb.exceptions import OracleCapExceededError
from speedbump_mpc.core.bnb.rounding import binary_assignments, pure_binary_rows
from speedbump_mpc.core.bnb.solver import IncumbentRecord, MiqpSolution, MiqpStatus
from speedbump_mpc.core.qp.solver import QpSolver
from speedbump_mpc.domain.problem import MiqpProblem

logger = logging.getLogger(__name__)

ORACLE_BINARY_CAP = 20
PURE_ROW_TOL = 1e-9


def enumerate_oracle(
    problem: MiqpProblem,
    qp_solver: QpSolver | None = None,
    cap: int = ORACLE_BINARY_CAP,
) -> MiqpSolution:
    """Exhaustive search over every binary assignment.

    Assignments are visited in lexicographic order of the integer columns; only a
    strictly better objective replaces the incumbent, so the lowest assignment wins
    ties. Assignments that break a row touching binaries only are skipped without a
    QP solve.
    """
    columns = list(problem.integer_set)
    if len(columns) > cap:
        raise OracleCapExceededError(len(columns), cap)
    qp_solver = qp_solver or QpSolver()
    started = perf_counter()

    rows = pure_binary_rows(problem)
    pure_block = problem.g_matrix[rows][:, columns].toarray()
    pure_rhs = problem.g_vec[rows]
    lower = problem.lb[columns]
    upper = problem.ub[columns]

    best_primal = None
    best_objective = inf
    history: list[IncumbentRecord] = []
    solved = 0
    for index, assignment in enumerate(binary_assignments(len(columns))):
        if rows.size and np.any(pure_block @ assignment > pure_rhs + PURE_ROW_TOL):
            continue
        if np.any(assignment < lower) or np.any(assignment > upper):
            continue
        fixed = problem.with_fixed(columns, assignment.tolist())
        solution = qp_solver.solve(fixed)
        solved += 1
        solution.raise_for_iteration_limit()
        if solution.is_optimal and solution.objective < best_objective:
            best_primal = solution.primal
            best_objective = solution.objective
            history.append(IncumbentRecord(index, best_objective, best_objective))

    elapsed = perf_counter() - started
    logger.debug(
        "Oracle enumerated %d binaries with %d QP solves in %.3f s",
        len(columns),
        solved,
        elapsed,
    )
    return MiqpSolution(
        status=MiqpStatus.OPTIMAL if best_primal is not None else MiqpStatus.INFEASIBLE,
        primal=best_primal,
        objective=best_objective,
        nodes_explored=solved,
        incumbent_history=history,
        best_bound=best_objective,
        solve_time=elapsed,
    )
