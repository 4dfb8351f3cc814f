class LayoutError(ValueError):
    pass


class BigMTooSmallError(ValueError):
    variable: str
    required: float
    big_m: float

    def __init__(self, variable: str, required: float, big_m: float) -> None:
        super().__init__(
            f"big_m={big_m:g} is too small for the {variable} indicator rows, "
            f"at least {required:g} is needed to keep them exact"
        )
        self.variable = variable
        self.required = required
        self.big_m = big_m
