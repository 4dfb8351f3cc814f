class QpDimensionError(ValueError):
    pass


class NonConvexProblemError(ValueError):
    pass


class NonFiniteBoundsError(ValueError):
    columns: list[int]

    def __init__(self, columns: list[int]) -> None:
        shown = ", ".join(str(column) for column in columns[:5])
        super().__init__(f"Columns without finite box bounds: {shown}")
        self.columns = columns


class QpIterationLimitError(Exception):
    iterations: int

    def __init__(self, iterations: int) -> None:
        super().__init__(f"QP solver stopped at the iteration limit ({iterations})")
        self.iterations = iterations
