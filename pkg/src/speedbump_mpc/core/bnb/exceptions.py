class NodeSolveError(Exception):
    node_index: int
    depth: int
    status: str

    def __init__(self, node_index: int, depth: int, status: str) -> None:
        super().__init__(
            f"Relaxation at node {node_index} (depth {depth}) ended as {status}"
        )
        self.node_index = node_index
        self.depth = depth
        self.status = status


class OracleCapExceededError(ValueError):
    n_binaries: int
    cap: int

    def __init__(self, n_binaries: int, cap: int) -> None:
        super().__init__(
            f"Enumeration is limited to {cap} binaries, the problem has {n_binaries}"
        )
        self.n_binaries = n_binaries
        self.cap = cap
