import numpy as np
from numpy.typing import NDArray

from speedbump_mpc.domain.problem import VariableLayout
from speedbump_mpc.domain.trajectory import BinaryActivations
from speedbump_mpc.domain.vehicle import ControlInput


def control_at(
    variables: VariableLayout, z: NDArray[np.float64], k: int
) -> ControlInput:
    jx, jy = (float(value) for value in z[variables.control_columns(k)])
    return ControlInput(jx=jx, jy=jy)


def activations_at(
    variables: VariableLayout, z: NDArray[np.float64], k: int
) -> BinaryActivations:
    """Binary values at step k, rounded to the nearest integer."""
    values = {
        name: int(round(float(z[variables.column(k, name)])))
        for name in variables.binary_names
    }
    return BinaryActivations(**values)
