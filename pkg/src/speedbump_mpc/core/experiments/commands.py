import logging
from collections.abc import Callable
from dataclasses import dataclass, fields
from math import inf
from typing import Any

import numpy as np

from speedbump_mpc.core.bnb.oracle import ORACLE_BINARY_CAP, enumerate_oracle
from speedbump_mpc.core.bnb.solver import BranchAndBoundSolver, MiqpSolution
from speedbump_mpc.core.builder.miqp import assemble
from speedbump_mpc.core.experiments.exceptions import OracleHorizonError
from speedbump_mpc.core.mpc.compliance import ComplianceReport, check_trajectory
from speedbump_mpc.core.mpc.simulation import MpcSimulationService, ProblemObserver
from speedbump_mpc.core.qp.solver import QpSolver
from speedbump_mpc.domain.problem import VariableLayout
from speedbump_mpc.domain.scenario import InvalidScenarioError, Scenario, validate
from speedbump_mpc.domain.trajectory import Trajectory

logger = logging.getLogger(__name__)

TrialObserver = Callable[[int], None]

DEFAULT_ORACLE_SEED = 42
ORACLE_GAP_TOL = 1e-6
# initial states are drawn from [bump_start - margin, bump_end] x [min speed, v_ref]
ORACLE_APPROACH_MARGIN = 2.0
ORACLE_MIN_SPEED = 3.0


@dataclass(frozen=True, kw_only=True)
class ScenarioOverrides:
    human_behavior_mode: bool | None = None
    strict_indicators: bool | None = None
    horizon_n: int | None = None
    sim_steps: int | None = None

    def apply(self, scenario: Scenario) -> Scenario:
        changes: dict[str, Any] = {}
        for field in fields(self):
            value = getattr(self, field.name)
            if value is None:
                continue
            logger.info(
                "Override %s: %s -> %s",
                field.name,
                getattr(scenario, field.name),
                value,
            )
            changes[field.name] = value
        return scenario.with_changes(**changes) if changes else scenario


@dataclass(frozen=True, kw_only=True)
class RunScenarioResult:
    scenario: Scenario
    trajectory: Trajectory
    # None when the first step already failed
    report: ComplianceReport | None

    @property
    def solver_failed(self) -> bool:
        return not self.trajectory.succeeded

    @property
    def passed(self) -> bool:
        return self.report is not None and self.report.passed


class RunScenarioService:
    _mpc_simulation_service: MpcSimulationService

    def __init__(self, mpc_simulation_service: MpcSimulationService) -> None:
        self._mpc_simulation_service = mpc_simulation_service

    def run(
        self, scenario: Scenario, problem_observer: ProblemObserver | None = None
    ) -> RunScenarioResult:
        violations = validate(scenario)
        if violations:
            raise InvalidScenarioError(violations)
        trajectory = self._mpc_simulation_service.run(scenario, problem_observer)
        report: ComplianceReport | None = None
        if trajectory.records:
            report = check_trajectory(trajectory, scenario)
        return RunScenarioResult(
            scenario=scenario, trajectory=trajectory, report=report
        )


@dataclass(frozen=True, kw_only=True)
class OracleTrial:
    trial: int
    x0: float
    vx0: float
    bnb_status: str
    bnb_objective: float
    bnb_nodes: int
    oracle_status: str
    oracle_objective: float
    oracle_solves: int
    gap: float


def relative_gap(candidate: MiqpSolution, reference: MiqpSolution) -> float:
    """|a - b| / (1 + |b|); two infeasible answers agree, one-sided ones never do."""
    if not candidate.has_incumbent and not reference.has_incumbent:
        return 0.0
    if candidate.has_incumbent != reference.has_incumbent:
        return inf
    difference = abs(candidate.objective - reference.objective)
    return difference / (1.0 + abs(reference.objective))


@dataclass(frozen=True, kw_only=True)
class OracleCompareResult:
    seed: int
    horizon_n: int
    n_binaries: int
    trials: list[OracleTrial]

    @property
    def max_gap(self) -> float:
        return max((trial.gap for trial in self.trials), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_gap <= ORACLE_GAP_TOL


class OracleCompareService:
    """Branch-and-bound against exhaustive enumeration on random states near the
    bump."""

    _bnb_solver: BranchAndBoundSolver
    _qp_solver: QpSolver

    def __init__(self, bnb_solver: BranchAndBoundSolver, qp_solver: QpSolver) -> None:
        self._bnb_solver = bnb_solver
        self._qp_solver = qp_solver

    def compare(
        self,
        scenario: Scenario,
        trials: int,
        seed: int = DEFAULT_ORACLE_SEED,
        trial_observer: TrialObserver | None = None,
    ) -> OracleCompareResult:
        if trials < 0:
            raise ValueError("trials must be non-negative")
        violations = validate(scenario)
        if violations:
            raise InvalidScenarioError(violations)
        layout = VariableLayout(scenario.horizon_n, scenario.human_behavior_mode)
        if layout.n_binary > ORACLE_BINARY_CAP:
            raise OracleHorizonError(
                scenario.horizon_n, layout.n_binary, ORACLE_BINARY_CAP
            )
        if trials == 0:
            logger.warning("No oracle trials requested, the comparison is vacuous")
        rng = np.random.default_rng(seed)
        results = []
        for trial in range(trials):
            x0 = float(
                rng.uniform(
                    scenario.bump_start - ORACLE_APPROACH_MARGIN, scenario.bump_end
                )
            )
            vx0 = float(rng.uniform(ORACLE_MIN_SPEED, scenario.v_ref))
            if trial_observer is not None:
                trial_observer(trial)
            results.append(self._compare_one(scenario, trial, x0, vx0))
        return OracleCompareResult(
            seed=seed,
            horizon_n=scenario.horizon_n,
            n_binaries=layout.n_binary,
            trials=results,
        )

    def _compare_one(
        self, scenario: Scenario, trial: int, x0: float, vx0: float
    ) -> OracleTrial:
        state = scenario.with_changes(x0=x0, vx0=vx0).initial_state()
        problem = assemble(scenario, state)
        bnb = self._bnb_solver.solve(problem)
        oracle = enumerate_oracle(problem, self._qp_solver)
        gap = relative_gap(bnb, oracle)
        logger.debug(
            "Trial %d at x0=%.4f vx0=%.4f: bnb %.10g, oracle %.10g, gap %.3g",
            trial,
            x0,
            vx0,
            bnb.objective,
            oracle.objective,
            gap,
        )
        return OracleTrial(
            trial=trial,
            x0=x0,
            vx0=vx0,
            bnb_status=bnb.status,
            bnb_objective=bnb.objective,
            bnb_nodes=bnb.nodes_explored,
            oracle_status=oracle.status,
            oracle_objective=oracle.objective,
            oracle_solves=oracle.nodes_explored,
            gap=gap,
        )

