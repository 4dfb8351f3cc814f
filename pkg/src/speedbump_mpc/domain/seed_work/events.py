from abc import ABC, abstractmethod
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any


@dataclass(kw_only=True, frozen=True)
class SolverEvent(ABC):
    @property
    def type_name(self) -> str:
        return type(self).__name__

    @abstractmethod
    def _trace_fields(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_trace_line(self) -> str:
        fields = " ".join(
            f"{name}={value}" for name, value in self._trace_fields().items()
        )
        return f"{self.type_name} {fields}"


class CompleteEventBufferError(Exception):
    pass


class EventBuffer:
    _events: list[SolverEvent]
    _is_complete: bool

    def __init__(self) -> None:
        self._events = []
        self._is_complete = False

    def append(self, event: SolverEvent) -> None:
        if self._is_complete:
            raise CompleteEventBufferError("Can not append event into complete buffer")
        self._events.append(event)

    def complete(self) -> Iterable[SolverEvent]:
        self._is_complete = True
        return self._events

    def __len__(self) -> int:
        return len(self._events)
