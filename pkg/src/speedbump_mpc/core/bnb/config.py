from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray


class BranchingRule(StrEnum):
    MOST_FRACTIONAL = "most_fractional"


class SearchOrder(StrEnum):
    BEST_FIRST = "best_first"


@dataclass(frozen=True, kw_only=True, eq=False)
class BnbConfig:
    int_tol: float = 1e-6
    gap_abs: float = 1e-6
    gap_rel: float = 1e-8
    node_limit: int = 100_000
    branching: BranchingRule = BranchingRule.MOST_FRACTIONAL
    search: SearchOrder = SearchOrder.BEST_FIRST
    # full primal guess, typically the shifted previous MPC solution
    warm_start: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        for name in ("int_tol", "gap_abs", "gap_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.node_limit < 1:
            raise ValueError("node_limit must be at least 1")
        object.__setattr__(self, "branching", BranchingRule(self.branching))
        object.__setattr__(self, "search", SearchOrder(self.search))
