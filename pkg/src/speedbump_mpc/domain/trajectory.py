from dataclasses import dataclass, field as dataclass_field

from speedbump_mpc.domain.vehicle import ControlInput, VehicleState


@dataclass(frozen=True, kw_only=True)
class BinaryActivations:
    delta1: int
    delta2: int
    delta3: int
    # None when the turning binaries are not part of the model
    turn_left: int | None = None
    turn_right: int | None = None
    is_turning: int | None = None


@dataclass(frozen=True, kw_only=True)
class SolveStats:
    status: str
    solve_time: float
    nodes_explored: int


@dataclass(frozen=True, kw_only=True)
class TrajectoryRecord:
    k: int
    t: float
    state: VehicleState
    control: ControlInput
    activations: BinaryActivations
    stats: SolveStats


@dataclass(frozen=True, kw_only=True)
class StepFailure:
    k: int
    status: str
    message: str


@dataclass(kw_only=True)
class Trajectory:
    dt: float
    records: list[TrajectoryRecord] = dataclass_field(default_factory=list)
    final_state: VehicleState | None = None
    failure: StepFailure | None = None

    @property
    def succeeded(self) -> bool:
        return self.failure is None

    def applied_states(self) -> list[VehicleState]:
        """Every state the plant visited: one per record plus the final state."""
        states = [record.state for record in self.records]
        if self.final_state is not None:
            states.append(self.final_state)
        return states

    def __len__(self) -> int:
        return len(self.records)
