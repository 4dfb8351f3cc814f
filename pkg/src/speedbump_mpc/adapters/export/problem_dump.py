from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from speedbump_mpc.domain.problem import MiqpProblem
from speedbump_mpc.utils.formatting import format_round_trip


def _matrix_lines(name: str, matrix: sparse.spmatrix) -> list[str]:
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{name} {coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    lines += [
        f"{coo.row[i]} {coo.col[i]} {format_round_trip(float(coo.data[i]))}"
        for i in order
    ]
    return lines


def _vector_lines(name: str, vector: NDArray[np.float64]) -> list[str]:
    return [f"{name} {vector.size}"] + [
        f"{i} {format_round_trip(float(value))}" for i, value in enumerate(vector)
    ]


def dump_problem(problem: MiqpProblem) -> str:
    """Plain-text dump: dimensions, then (row, column, value) triplets of H, G and F,
    then every vector entry and the integer set."""
    lines = [
        f"n {problem.n}",
        f"m_inequality {problem.m_inequality}",
        f"m_equality {problem.m_equality}",
        f"objective_offset {format_round_trip(problem.objective_offset)}",
    ]
    if problem.layout is not None:
        lines.append(f"layout {problem.layout!r}")
    lines += _matrix_lines("H", problem.h_matrix)
    lines += _vector_lines("h", problem.h_vec)
    lines += _matrix_lines("G", problem.g_matrix)
    lines += _vector_lines("g", problem.g_vec)
    lines += _matrix_lines("F", problem.f_matrix)
    lines += _vector_lines("f", problem.f_vec)
    lines += _vector_lines("lb", problem.lb)
    lines += _vector_lines("ub", problem.ub)
    lines.append(f"integer_set {len(problem.integer_set)}")
    lines += [str(column) for column in problem.integer_set]
    return "\n".join(lines) + "\n"


def write_problem_dump(problem: MiqpProblem, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_problem(problem), encoding="utf-8")
    return path
