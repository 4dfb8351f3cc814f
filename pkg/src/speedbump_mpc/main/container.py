# pylint: disable=no-name-in-module
from dependency_injector.containers import DeclarativeContainer, WiringConfiguration
from dependency_injector.providers import Configuration, Factory, Singleton

from speedbump_mpc.adapters.scenario_file.parser import ScenarioFileParser
from speedbump_mpc.core.bnb.config import BnbConfig
from speedbump_mpc.core.bnb.solver import BranchAndBoundSolver
from speedbump_mpc.core.events.dispatcher import SolverEventDispatcher
from speedbump_mpc.core.events.registry import SolverEventHandlerRegistry
from speedbump_mpc.core.experiments.commands import (
    OracleCompareService,
    RunScenarioService,
)
from speedbump_mpc.core.mpc.simulation import MpcSimulationService
from speedbump_mpc.core.qp.solver import QpSolver

DEFAULT_CONFIG = {
    "qp": {
        "kkt_tol": 1e-6,
        "max_iter": 500,
    },
    "bnb": {
        "int_tol": 1e-6,
        "gap_abs": 1e-6,
        "gap_rel": 1e-8,
        "node_limit": 100_000,
    },
}


class DIContainer(DeclarativeContainer):
    wiring_config = WiringConfiguration(
        packages=["speedbump_mpc.adapters.cli"],
        auto_wire=False,
    )

    config = Configuration()

    # region Solver Events

    solver_event_handler_registry = Singleton(SolverEventHandlerRegistry)
    solver_event_dispatcher = Singleton(
        SolverEventDispatcher, registry=solver_event_handler_registry
    )

    # endregion

    # region Solvers

    qp_solver = Singleton(
        QpSolver, kkt_tol=config.qp.kkt_tol, max_iter=config.qp.max_iter
    )
    bnb_config = Singleton(
        BnbConfig,
        int_tol=config.bnb.int_tol,
        gap_abs=config.bnb.gap_abs,
        gap_rel=config.bnb.gap_rel,
        node_limit=config.bnb.node_limit,
    )
    bnb_solver = Singleton(
        BranchAndBoundSolver,
        qp_solver=qp_solver,
        config=bnb_config,
        dispatcher=solver_event_dispatcher,
    )

    # endregion

    # region Adapters

    scenario_file_parser = Factory(ScenarioFileParser)

    # endregion

    # region Application Core Services

    mpc_simulation_service = Singleton(MpcSimulationService, bnb_solver=bnb_solver)
    run_scenario_service = Singleton(
        RunScenarioService, mpc_simulation_service=mpc_simulation_service
    )
    oracle_compare_service = Singleton(
        OracleCompareService, bnb_solver=bnb_solver, qp_solver=qp_solver
    )

    # endregion


def create_container(config: dict | None = None) -> DIContainer:
    container = DIContainer()
    container.config.from_dict(config if config is not None else DEFAULT_CONFIG)
    return container
