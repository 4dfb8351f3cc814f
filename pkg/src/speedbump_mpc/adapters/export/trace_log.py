from typing import TextIO

from speedbump_mpc.core.bnb.events import IncumbentFound, NodeBranched, NodePruned
from speedbump_mpc.core.events.registry import SolverEventHandlerRegistry
from speedbump_mpc.domain.seed_work.events import SolverEvent

TRACED_EVENTS: tuple[type[SolverEvent], ...] = (
    NodeBranched,
    NodePruned,
    IncumbentFound,
)


class SolverTraceWriter:
    """Writes one line per branch-and-bound event, grouped under section headers
    such as `step=3` or `trial=7`."""

    _stream: TextIO

    def __init__(self, stream: TextIO) -> None:
        self._stream = stream

    def begin_section(self, label: str, index: int) -> None:
        self._stream.write(f"{label}={index}\n")

    def write_event(self, event: SolverEvent) -> None:
        self._stream.write(event.to_trace_line() + "\n")

    def register(self, registry: SolverEventHandlerRegistry) -> None:
        for event_type in TRACED_EVENTS:
            registry.register(event_type, self.write_event)

    def unregister(self, registry: SolverEventHandlerRegistry) -> None:
        for event_type in TRACED_EVENTS:
            registry.unregister(event_type, self.write_event)
