from dataclasses import dataclass
from typing import Any

from speedbump_mpc.domain.seed_work.events import SolverEvent


@dataclass(kw_only=True, frozen=True)
class SampleSolverEvent(SolverEvent):
    label: str = "sample"

    def _trace_fields(self) -> dict[str, Any]:
        return {"label": self.label}


@dataclass(kw_only=True, frozen=True)
class AnotherSampleSolverEvent(SolverEvent):
    def _trace_fields(self) -> dict[str, Any]:
        return {}


def mock_event_handler(event: SolverEvent) -> None:
    pass


def mock_another_event_handler(event: SolverEvent) -> None:
    pass
