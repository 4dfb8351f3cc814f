class OracleHorizonError(ValueError):
    horizon_n: int
    n_binaries: int
    cap: int

    def __init__(self, horizon_n: int, n_binaries: int, cap: int) -> None:
        super().__init__(
            f"Horizon {horizon_n} gives {n_binaries} binaries, "
            f"the enumeration oracle is limited to {cap}"
        )
        self.horizon_n = horizon_n
        self.n_binaries = n_binaries
        self.cap = cap
