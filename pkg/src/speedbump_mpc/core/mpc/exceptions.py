class EmptyTrajectoryError(ValueError):
    pass
