import heapq
import logging
from dataclasses import dataclass, field as dataclass_field
from enum import StrEnum
from math import inf
from time import perf_counter

import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.core.bnb.config import BnbConfig
from speedbump_mpc.core.bnb.events import IncumbentFound, NodeBranched, NodePruned
from speedbump_mpc.core.bnb.exceptions import NodeSolveError
from speedbump_mpc.core.bnb.rounding import ComponentRepair, most_fractional
from speedbump_mpc.core.events.dispatcher import SolverEventDispatcher
from speedbump_mpc.core.qp.solution import QpSolution, QpStatus
from speedbump_mpc.core.qp.solver import QpSolver
from speedbump_mpc.domain.problem import MiqpProblem
from speedbump_mpc.domain.seed_work.events import EventBuffer

logger = logging.getLogger(__name__)


class MiqpStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NODE_LIMIT = "node_limit"


@dataclass(frozen=True)
class IncumbentRecord:
    node_index: int
    objective: float
    best_bound: float


@dataclass(frozen=True, kw_only=True, eq=False)
class MiqpSolution:
    status: MiqpStatus
    primal: NDArray[np.float64] | None
    objective: float
    nodes_explored: int
    incumbent_history: list[IncumbentRecord]
    best_bound: float
    solve_time: float

    @property
    def has_incumbent(self) -> bool:
        return self.primal is not None


@dataclass(eq=False)
class _Node:
    index: int
    depth: int
    bound: float
    lb: NDArray[np.float64]
    ub: NDArray[np.float64]
    relaxation: QpSolution
    branch_column: int


@dataclass(eq=False)
class _Search:
    """Mutable state of one branch-and-bound run."""

    heap: list[tuple[float, int, _Node]] = dataclass_field(default_factory=list)
    incumbent: NDArray[np.float64] | None = None
    incumbent_objective: float = inf
    history: list[IncumbentRecord] = dataclass_field(default_factory=list)
    nodes_explored: int = 0
    root_bound: float = -inf
    # bound of the node being branched; it is off the heap while its children
    # are evaluated
    active_bound: float = inf

    def open_bound(self) -> float:
        bound = min(self.active_bound, self.incumbent_objective)
        if self.heap:
            bound = min(bound, self.heap[0][0])
        return bound


class BranchAndBoundSolver:
    """Best-first branch-and-bound over the binary columns of an MIQP.

    Every created node has its QP relaxation solved immediately, so a node on the
    heap already knows its bound and the column it will branch on.
    """

    _qp_solver: QpSolver
    _config: BnbConfig
    _dispatcher: SolverEventDispatcher | None

    def __init__(
        self,
        qp_solver: QpSolver,
        config: BnbConfig,
        dispatcher: SolverEventDispatcher | None = None,
    ) -> None:
        self._qp_solver = qp_solver
        self._config = config
        self._dispatcher = dispatcher

    @property
    def config(self) -> BnbConfig:
        return self._config

    def solve(
        self, problem: MiqpProblem, warm_start: NDArray[np.float64] | None = None
    ) -> MiqpSolution:
        started = perf_counter()
        events = EventBuffer()
        run = _BranchAndBoundRun(
            problem=problem,
            qp_solver=self._qp_solver,
            config=self._config,
            events=events,
        )
        guess = warm_start if warm_start is not None else self._config.warm_start
        try:
            status, best_bound = run.execute(guess)
        finally:
            if self._dispatcher is not None:
                self._dispatcher.dispatch(events)
        search = run.search
        elapsed = perf_counter() - started
        logger.debug(
            "Branch-and-bound %s: objective %.6g, bound %.6g, %d nodes, %.3f s",
            status,
            search.incumbent_objective,
            best_bound,
            search.nodes_explored,
            elapsed,
        )
        return MiqpSolution(
            status=status,
            primal=search.incumbent,
            objective=search.incumbent_objective,
            nodes_explored=search.nodes_explored,
            incumbent_history=search.history,
            best_bound=best_bound,
            solve_time=elapsed,
        )


class _BranchAndBoundRun:
    _problem: MiqpProblem
    _qp_solver: QpSolver
    _config: BnbConfig
    _events: EventBuffer
    _repair: ComponentRepair
    search: _Search

    def __init__(
        self,
        *,
        problem: MiqpProblem,
        qp_solver: QpSolver,
        config: BnbConfig,
        events: EventBuffer,
    ) -> None:
        self._problem = problem
        self._qp_solver = qp_solver
        self._config = config
        self._events = events
        self._repair = ComponentRepair(problem)
        self.search = _Search()

    def _gap(self) -> float:
        config = self._config
        incumbent = abs(self.search.incumbent_objective)
        return max(config.gap_abs, config.gap_rel * incumbent)

    def execute(
        self, warm_start: NDArray[np.float64] | None
    ) -> tuple[MiqpStatus, float]:
        warm = self._solve_warm_start(warm_start) if warm_start is not None else None
        root = self._evaluate(
            lb=self._problem.lb,
            ub=self._problem.ub,
            depth=0,
            parent_bound=-inf,
            guess=warm_start,
        )
        if root.relaxation.is_optimal:
            self.search.root_bound = root.bound
            self.search.active_bound = root.bound
        if warm is not None and warm.is_optimal:
            self._offer_incumbent(0, 0, root.bound, warm.primal, warm.objective)
        self._settle(root)

        search = self.search
        while search.heap:
            bound, _, node = heapq.heappop(search.heap)
            search.active_bound = bound
            if search.incumbent is not None:
                if bound >= search.incumbent_objective - self._gap():
                    return MiqpStatus.OPTIMAL, min(bound, search.incumbent_objective)
            if search.nodes_explored + 2 > self._config.node_limit:
                heapq.heappush(search.heap, (bound, node.index, node))
                logger.warning(
                    "Node limit %d reached with %d open nodes",
                    self._config.node_limit,
                    len(search.heap),
                )
                return MiqpStatus.NODE_LIMIT, search.open_bound()
            self._branch(node)

        if search.incumbent is None:
            return MiqpStatus.INFEASIBLE, inf
        return MiqpStatus.OPTIMAL, search.incumbent_objective

    def _solve_warm_start(self, warm_start: NDArray[np.float64]) -> QpSolution:
        columns = list(self._problem.integer_set)
        problem = self._problem
        rounded = np.clip(
            np.round(warm_start[columns]), problem.lb[columns], problem.ub[columns]
        )
        fixed = problem.with_fixed(columns, rounded.tolist())
        solution = self._qp_solver.solve(fixed, initial_guess=warm_start)
        logger.debug("Warm start rounded to %s", solution.status)
        return solution

    def _evaluate(
        self,
        *,
        lb: NDArray[np.float64],
        ub: NDArray[np.float64],
        depth: int,
        parent_bound: float,
        guess: NDArray[np.float64] | None,
    ) -> _Node:
        index = self.search.nodes_explored
        self.search.nodes_explored += 1
        relaxation = self._qp_solver.solve(
            self._problem.with_bounds(lb, ub), initial_guess=guess
        )
        if relaxation.status not in (QpStatus.OPTIMAL, QpStatus.INFEASIBLE):
            raise NodeSolveError(index, depth, relaxation.status)
        bound = (
            max(relaxation.objective, parent_bound) if relaxation.is_optimal else inf
        )
        return _Node(
            index=index,
            depth=depth,
            bound=bound,
            lb=lb,
            ub=ub,
            relaxation=relaxation,
            branch_column=-1,
        )

    def _settle(self, node: _Node) -> None:
        """Prunes the node, turns it into an incumbent, or queues it for branching."""
        search = self.search
        if not node.relaxation.is_optimal:
            self._prune(node, "infeasible")
            return
        if search.incumbent is not None and (
            node.bound >= search.incumbent_objective - self._config.gap_abs
        ):
            self._prune(node, "bound")
            return

        z = node.relaxation.primal
        columns = self._problem.integer_set
        int_tol = self._config.int_tol
        repaired = self._repair.repair(z, node.lb, node.ub)
        polished = None
        if repaired.complete:
            polished = self._polish(node, repaired.values)
            if polished is not None and polished <= node.bound + self._gap():
                return
            column = most_fractional(z, columns, int_tol)
        else:
            # repaired columns are skipped while an unsettled one is fractional
            column = most_fractional(z, columns, int_tol, repaired.values)
            if column is None:
                column = most_fractional(z, columns, int_tol)
        if column is None:
            # integral relaxation: its rounding is the best completion of the node
            if polished is not None or self._polish(node, {}) is not None:
                return
            column = most_fractional(z, columns, 0.0)
            if column is None or node.lb[column] == node.ub[column]:
                self._prune(node, "unrepairable")
                return
        node.branch_column = column
        heapq.heappush(search.heap, (node.bound, node.index, node))

    def _polish(self, node: _Node, values: dict[int, float]) -> float | None:
        """Fixes the binaries (repaired values, else rounded relaxation), solves the
        remaining QP and offers the result as incumbent. Returns its objective, or
        None when that completion is infeasible."""
        z = node.relaxation.primal
        columns = list(self._problem.integer_set)
        fixed_values = [
            values.get(column, float(round(z[column]))) for column in columns
        ]
        candidate = z.copy()
        candidate[columns] = fixed_values
        fixed = self._problem.with_bounds(node.lb, node.ub).with_fixed(
            columns, fixed_values
        )
        polished = self._qp_solver.solve(fixed, initial_guess=candidate)
        if polished.status == QpStatus.INFEASIBLE:
            return None
        if not polished.is_optimal:
            raise NodeSolveError(node.index, node.depth, polished.status)
        self._offer_incumbent(
            node.index, node.depth, node.bound, polished.primal, polished.objective
        )
        return polished.objective

    def _offer_incumbent(
        self,
        node_index: int,
        depth: int,
        bound: float,
        primal: NDArray[np.float64],
        objective: float,
    ) -> None:
        search = self.search
        if objective >= search.incumbent_objective:
            return
        search.incumbent = primal
        search.incumbent_objective = objective
        lower = max(search.root_bound, min(bound, search.open_bound()))
        best_bound = min(lower, objective)
        search.history.append(IncumbentRecord(node_index, objective, best_bound))
        self._events.append(
            IncumbentFound(
                node_index=node_index, depth=depth, bound=bound, objective=objective
            )
        )

    def _prune(self, node: _Node, reason: str) -> None:
        self._events.append(
            NodePruned(
                node_index=node.index, depth=node.depth, bound=node.bound, reason=reason
            )
        )

    def _branch(self, node: _Node) -> None:
        column = node.branch_column
        self._events.append(
            NodeBranched(
                node_index=node.index,
                depth=node.depth,
                bound=node.bound,
                column=column,
                value=float(node.relaxation.primal[column]),
            )
        )
        for value in (0.0, 1.0):
            lb = node.lb.copy()
            ub = node.ub.copy()
            lb[column] = value
            ub[column] = value
            child = self._evaluate(
                lb=lb,
                ub=ub,
                depth=node.depth + 1,
                parent_bound=node.bound,
                guess=node.relaxation.primal,
            )
            self._settle(child)


def solve_miqp(
    problem: MiqpProblem,
    config: BnbConfig | None = None,
    qp_solver: QpSolver | None = None,
) -> MiqpSolution:
    return BranchAndBoundSolver(qp_solver or QpSolver(), config or BnbConfig()).solve(
        problem
    )
