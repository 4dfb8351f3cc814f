from speedbump_mpc.core.events.registry import SolverEventHandlerRegistry
from speedbump_mpc.domain.seed_work.events import EventBuffer


class SolverEventDispatcher:
    _registry: SolverEventHandlerRegistry

    def __init__(self, registry: SolverEventHandlerRegistry) -> None:
        self._registry = registry

    def dispatch(self, buffer: EventBuffer) -> int:
        """Deliver every buffered event in emission order; returns the event count."""
        events = list(buffer.complete())
        for event in events:
            for handler in self._registry.get_handlers(type(event)):
                handler(event)
        return len(events)
