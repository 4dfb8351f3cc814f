from dataclasses import dataclass
from typing import Any, ClassVar

from speedbump_mpc.domain.seed_work.events import SolverEvent
from speedbump_mpc.utils.formatting import format_float


@dataclass(kw_only=True, frozen=True)
class NodeEvent(SolverEvent):
    action: ClassVar[str]

    node_index: int
    depth: int
    bound: float

    def _trace_fields(self) -> dict[str, Any]:
        return {
            "node": self.node_index,
            "depth": self.depth,
            "bound": self.bound,
            "action": self.action,
            **self._details(),
        }

    def _details(self) -> dict[str, Any]:
        return {}

    def to_trace_line(self) -> str:
        return " ".join(
            f"{name}={_format_value(value)}"
            for name, value in self._trace_fields().items()
        )


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return format_float(value, 12)
    return str(value)


@dataclass(kw_only=True, frozen=True)
class NodeBranched(NodeEvent):
    action: ClassVar[str] = "branch"

    column: int
    value: float

    def _details(self) -> dict[str, Any]:
        return {"column": self.column, "value": self.value}


@dataclass(kw_only=True, frozen=True)
class NodePruned(NodeEvent):
    action: ClassVar[str] = "prune"

    reason: str

    def _details(self) -> dict[str, Any]:
        return {"reason": self.reason}


@dataclass(kw_only=True, frozen=True)
class IncumbentFound(NodeEvent):
    action: ClassVar[str] = "incumbent"

    objective: float

    def _details(self) -> dict[str, Any]:
        return {"objective": self.objective}
