from collections import defaultdict
from collections.abc import Callable, Collection

from speedbump_mpc.domain.seed_work.events import SolverEvent

SolverEventHandler = Callable[[SolverEvent], None]


class SolverEventHandlerRegistry:
    # handlers run in registration order
    _handlers: dict[type[SolverEvent], list[SolverEventHandler]]

    def __init__(self) -> None:
        self._handlers = defaultdict(list)

    def register(
        self, event_type: type[SolverEvent], event_handler: SolverEventHandler
    ) -> None:
        if event_handler not in self._handlers[event_type]:
            self._handlers[event_type].append(event_handler)

    def unregister(
        self, event_type: type[SolverEvent], event_handler: SolverEventHandler
    ) -> None:
        handlers = self._handlers.get(event_type, [])
        if event_handler in handlers:
            handlers.remove(event_handler)

    def get_handlers(
        self, event_type: type[SolverEvent]
    ) -> Collection[SolverEventHandler]:
        return self._handlers.get(event_type, [])
