import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse.linalg import splu

from speedbump_mpc.core.qp.exceptions import (
    NonConvexProblemError,
    NonFiniteBoundsError,
    QpDimensionError,
)
from speedbump_mpc.core.qp.kkt import kkt_residuals_of
from speedbump_mpc.core.qp.phase_one import solve_phase_one
from speedbump_mpc.core.qp.solution import KktResiduals, QpSolution, QpStatus
from speedbump_mpc.domain.problem import QpProblem

logger = logging.getLogger(__name__)

INFEASIBILITY_TOL = 1e-6
SYMMETRY_TOL = 1e-12
STEP_TO_BOUNDARY = 0.995
EQUALITY_REGULARIZATION = 1e-10
STALL_STEP = 1e-10
STALL_LIMIT = 5
# iterations an attempt may run without halving its worst KKT residual
STALL_WINDOW = 50
PROGRESS_FACTOR = 0.5
START_MU_MIN = 1.0
START_MU_MAX = 1e3
CORRECTOR_FALLBACK = 0.1
CENTRING_FLOOR = 0.1


def _diagonal(values: NDArray[np.float64]) -> sparse.csr_matrix:
    index = np.arange(values.size)
    return sparse.csr_matrix((values, (index, index)), shape=(values.size, values.size))


def _max_step(values: NDArray[np.float64], deltas: NDArray[np.float64]) -> float:
    decreasing = deltas < 0
    if not np.any(decreasing):
        return 1.0
    return float(min(1.0, np.min(-values[decreasing] / deltas[decreasing])))


class _ReducedProblem:
    """The QP with fixed columns substituted out, empty rows dropped and the
    inequality rows scaled to unit max-coefficient."""

    problem: QpProblem
    free: NDArray[np.int64]
    fixed: NDArray[np.int64]
    fixed_values: NDArray[np.float64]
    h_matrix: sparse.csr_matrix
    h_vec: NDArray[np.float64]
    g_rows: NDArray[np.int64]
    g_matrix: sparse.csr_matrix
    g_vec: NDArray[np.float64]
    row_scale: NDArray[np.float64]
    f_rows: NDArray[np.int64]
    f_matrix: sparse.csr_matrix
    f_vec: NDArray[np.float64]
    lb: NDArray[np.float64]
    ub: NDArray[np.float64]

    def __init__(self, problem: QpProblem) -> None:
        self.problem = problem
        is_fixed = problem.ub - problem.lb <= 0.0
        self.free = np.flatnonzero(~is_fixed)
        self.fixed = np.flatnonzero(is_fixed)
        self.fixed_values = problem.lb[self.fixed]
        free, fixed = self.free, self.fixed

        h_free = problem.h_matrix[free]
        self.h_matrix = h_free[:, free].tocsr()
        self.h_vec = problem.h_vec[free] + h_free[:, fixed] @ self.fixed_values

        g_free = problem.g_matrix[:, free].tocsr()
        g_free.eliminate_zeros()
        g_vec = problem.g_vec - problem.g_matrix[:, fixed] @ self.fixed_values
        self.g_rows = np.flatnonzero(np.diff(g_free.indptr) > 0)
        g_kept = g_free[self.g_rows]
        if self.g_rows.size:
            row_max = abs(g_kept).max(axis=1).toarray().reshape(-1)
            self.row_scale = 1.0 / row_max
        else:
            self.row_scale = np.zeros(0)
        self.g_matrix = _diagonal(self.row_scale) @ g_kept
        self.g_vec = self.row_scale * g_vec[self.g_rows]

        f_free = problem.f_matrix[:, free].tocsr()
        f_free.eliminate_zeros()
        f_vec = problem.f_vec - problem.f_matrix[:, fixed] @ self.fixed_values
        self.f_rows = np.flatnonzero(np.diff(f_free.indptr) > 0)
        self.f_matrix = f_free[self.f_rows]
        self.f_vec = f_vec[self.f_rows]

        self.lb = problem.lb[free]
        self.ub = problem.ub[free]

    @property
    def n(self) -> int:
        return int(self.free.size)

    def expand(
        self,
        z: NDArray[np.float64],
        lam: NDArray[np.float64],
        nu: NDArray[np.float64],
        lower: NDArray[np.float64],
        upper: NDArray[np.float64],
    ) -> tuple[NDArray[np.float64], ...]:
        """Primal and duals of the original problem. Fixed columns get the box
        multipliers that close their stationarity rows."""
        problem = self.problem
        primal = np.empty(problem.n)
        primal[self.free] = z
        primal[self.fixed] = self.fixed_values
        ineq_duals = np.zeros(problem.m_inequality)
        ineq_duals[self.g_rows] = self.row_scale * lam
        eq_duals = np.zeros(problem.m_equality)
        eq_duals[self.f_rows] = nu
        lower_duals = np.zeros(problem.n)
        upper_duals = np.zeros(problem.n)
        lower_duals[self.free] = lower
        upper_duals[self.free] = upper
        if self.fixed.size:
            gradient = (
                problem.h_matrix @ primal
                + problem.h_vec
                + problem.g_matrix.T @ ineq_duals
                + problem.f_matrix.T @ eq_duals
            )[self.fixed]
            lower_duals[self.fixed] = np.maximum(gradient, 0.0)
            upper_duals[self.fixed] = np.maximum(-gradient, 0.0)
        return primal, ineq_duals, eq_duals, lower_duals, upper_duals


@dataclass(eq=False)
class _Iterate:
    z: NDArray[np.float64]
    s: NDArray[np.float64]
    lam: NDArray[np.float64]
    nu: NDArray[np.float64]
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]


# a Newton step has the same components as an iterate
_Direction = _Iterate


class _NewtonSystem:
    """Factorised reduced KKT system of one interior-point iteration."""

    def __init__(self, reduced: _ReducedProblem, point: _Iterate) -> None:
        self._reduced = reduced
        self._point = point
        self.lower_gap = point.z - reduced.lb
        self.upper_gap = reduced.ub - point.z
        self.dual_residual = (
            reduced.h_matrix @ point.z
            + reduced.h_vec
            + reduced.g_matrix.T @ point.lam
            + reduced.f_matrix.T @ point.nu
            - point.lower
            + point.upper
        )
        self.ineq_residual = reduced.g_matrix @ point.z + point.s - reduced.g_vec
        self.eq_residual = reduced.f_matrix @ point.z - reduced.f_vec
        condensed = (
            reduced.h_matrix
            + reduced.g_matrix.T @ _diagonal(point.lam / point.s) @ reduced.g_matrix
            + _diagonal(point.lower / self.lower_gap + point.upper / self.upper_gap)
        )
        m_eq = reduced.f_matrix.shape[0]
        if m_eq:
            matrix = sparse.bmat(
                [
                    [condensed, reduced.f_matrix.T],
                    [reduced.f_matrix, -EQUALITY_REGULARIZATION * sparse.eye(m_eq)],
                ],
                format="csc",
            )
        else:
            matrix = sparse.csc_matrix(condensed)
        self._lu = splu(matrix)

    def solve(
        self,
        rc_s: NDArray[np.float64],
        rc_lower: NDArray[np.float64],
        rc_upper: NDArray[np.float64],
    ) -> _Direction:
        reduced, point = self._reduced, self._point
        n = reduced.n
        rhs_z = (
            -self.dual_residual
            - reduced.g_matrix.T @ ((rc_s + point.lam * self.ineq_residual) / point.s)
            + rc_lower / self.lower_gap
            - rc_upper / self.upper_gap
        )
        solution = self._lu.solve(np.concatenate([rhs_z, -self.eq_residual]))
        dz = solution[:n]
        ds = -self.ineq_residual - reduced.g_matrix @ dz
        return _Direction(
            z=dz,
            s=ds,
            lam=(rc_s - point.lam * ds) / point.s,
            nu=solution[n:],
            lower=(rc_lower - point.lower * dz) / self.lower_gap,
            upper=(rc_upper + point.upper * dz) / self.upper_gap,
        )

    def step_length(self, direction: _Direction) -> float:
        point = self._point
        return min(
            _max_step(point.s, direction.s),
            _max_step(point.lam, direction.lam),
            _max_step(self.lower_gap, direction.z),
            _max_step(self.upper_gap, -direction.z),
            _max_step(point.lower, direction.lower),
            _max_step(point.upper, direction.upper),
        )


@dataclass(frozen=True, eq=False)
class _Attempt:
    full: tuple[NDArray[np.float64], ...]
    kkt: KktResiduals
    iterations: int
    converged: bool
    stalled: bool

    @property
    def worst(self) -> float:
        return self.kkt.max()


def _is_interior(reduced: _ReducedProblem, point: _Iterate) -> bool:
    positive = (
        point.s,
        point.lam,
        point.lower,
        point.upper,
        point.z - reduced.lb,
        reduced.ub - point.z,
    )
    return all(
        bool(np.all(part > 0) and np.all(np.isfinite(part))) for part in positive
    )


class QpSolver:
    """Mehrotra predictor-corrector interior-point solver for box-bounded convex QPs.

    A phase-one LP decides feasibility first. Optimality is declared only when the
    KKT residuals recomputed on the original problem are within `kkt_tol`.
    """

    _kkt_tol: float
    _max_iter: int

    def __init__(self, kkt_tol: float = 1e-6, max_iter: int = 500) -> None:
        self._kkt_tol = kkt_tol
        self._max_iter = max_iter

    @property
    def kkt_tol(self) -> float:
        return self._kkt_tol

    def solve(
        self, problem: QpProblem, initial_guess: NDArray[np.float64] | None = None
    ) -> QpSolution:
        self._check_dimensions(problem, initial_guess)
        self._check_convexity(problem)
        self._check_bounds(problem)

        crossing = problem.lb - problem.ub
        if np.any(crossing > 0):
            midpoint = 0.5 * (problem.lb + problem.ub)
            return self._infeasible(problem, midpoint, float(crossing.max()) / 2.0)
        phase_one = solve_phase_one(problem)
        if phase_one.infeasibility > INFEASIBILITY_TOL:
            return self._infeasible(problem, phase_one.point, phase_one.infeasibility)

        starts = self._start_points(problem, initial_guess, phase_one.point)
        return self._interior_point(_ReducedProblem(problem), starts)

    def _check_dimensions(
        self, problem: QpProblem, initial_guess: NDArray[np.float64] | None
    ) -> None:
        n = problem.n
        expected = {
            "h_matrix": (problem.h_matrix.shape, (n, n)),
            "g_matrix": (problem.g_matrix.shape, (problem.g_vec.size, n)),
            "f_matrix": (problem.f_matrix.shape, (problem.f_vec.size, n)),
            "lb": (problem.lb.shape, (n,)),
            "ub": (problem.ub.shape, (n,)),
        }
        if initial_guess is not None:
            expected["initial_guess"] = (np.shape(initial_guess), (n,))
        for name, (actual, wanted) in expected.items():
            if tuple(actual) != wanted:
                raise QpDimensionError(f"{name} has shape {actual}, expected {wanted}")

    def _check_convexity(self, problem: QpProblem) -> None:
        h_matrix = problem.h_matrix
        if h_matrix.nnz == 0:
            return
        asymmetry = abs(h_matrix - h_matrix.T)
        if asymmetry.nnz and asymmetry.max() > SYMMETRY_TOL:
            raise NonConvexProblemError("Quadratic term is not symmetric")
        diagonal = h_matrix.diagonal()
        if np.any(diagonal < 0):
            raise NonConvexProblemError("Quadratic term has a negative diagonal entry")
        off_diagonal = h_matrix - _diagonal(diagonal)
        off_diagonal.eliminate_zeros()
        if off_diagonal.nnz:
            smallest = np.linalg.eigvalsh(h_matrix.toarray())[0]
            if smallest < -SYMMETRY_TOL * max(1.0, float(np.abs(diagonal).max())):
                raise NonConvexProblemError(
                    f"Quadratic term is indefinite (eigenvalue {smallest:g})"
                )

    def _check_bounds(self, problem: QpProblem) -> None:
        finite = np.isfinite(problem.lb) & np.isfinite(problem.ub)
        if not np.all(finite):
            raise NonFiniteBoundsError(np.flatnonzero(~finite).tolist())

    def _infeasible(
        self, problem: QpProblem, point: NDArray[np.float64], infeasibility: float
    ) -> QpSolution:
        logger.debug("QP infeasible, violation measure %.3e", infeasibility)
        zeros_n = np.zeros(problem.n)
        ineq = np.zeros(problem.m_inequality)
        eq = np.zeros(problem.m_equality)
        return QpSolution(
            status=QpStatus.INFEASIBLE,
            primal=point,
            ineq_duals=ineq,
            eq_duals=eq,
            lower_duals=zeros_n,
            upper_duals=zeros_n.copy(),
            objective=problem.objective(point),
            iterations=0,
            kkt=kkt_residuals_of(problem, point, ineq, eq, zeros_n, zeros_n),
            infeasibility=infeasibility,
        )

    def _start_points(
        self,
        problem: QpProblem,
        initial_guess: NDArray[np.float64] | None,
        feasible_point: NDArray[np.float64],
    ) -> list[tuple[NDArray[np.float64], bool]]:
        """Primal starts tried in order, each with centred (True) or unit duals."""
        origin = np.clip(np.zeros(problem.n), problem.lb, problem.ub)
        midpoint = 0.5 * (problem.lb + problem.ub)
        starts = [(feasible_point, True), (origin, True), (origin, False)]
        if initial_guess is not None:
            starts.insert(0, (np.asarray(initial_guess, dtype=np.float64), True))
        starts.append((midpoint, True))
        return starts

    def _initial_iterate(
        self, reduced: _ReducedProblem, start: NDArray[np.float64], centred: bool
    ) -> _Iterate:
        n = reduced.n
        margin = np.minimum(1.0, 0.1 * (reduced.ub - reduced.lb))
        z = np.clip(start[reduced.free], reduced.lb + margin, reduced.ub - margin)
        s = np.maximum(reduced.g_vec - reduced.g_matrix @ z, 1.0)
        nu = np.zeros(reduced.f_matrix.shape[0])
        if not centred:
            return _Iterate(
                z=z, s=s, lam=np.ones(s.size), nu=nu, lower=np.ones(n), upper=np.ones(n)
            )
        # every complementarity pair starts at the same mu, sized by the gradient
        gradient = reduced.h_matrix @ z + reduced.h_vec
        mu = float(
            np.clip(np.abs(gradient).max(initial=0.0), START_MU_MIN, START_MU_MAX)
        )
        return _Iterate(
            z=z,
            s=s,
            lam=mu / s,
            nu=nu,
            lower=mu / (z - reduced.lb),
            upper=mu / (reduced.ub - z),
        )

    def _certify(
        self, reduced: _ReducedProblem, point: _Iterate
    ) -> tuple[tuple[NDArray[np.float64], ...], KktResiduals]:
        full = reduced.expand(point.z, point.lam, point.nu, point.lower, point.upper)
        return full, kkt_residuals_of(reduced.problem, *full)

    def _interior_point(
        self,
        reduced: _ReducedProblem,
        starts: list[tuple[NDArray[np.float64], bool]],
    ) -> QpSolution:
        problem = reduced.problem
        budget = self._max_iter
        iterations = 0
        best: _Attempt | None = None
        for start, centred in starts:
            attempt = self._attempt(
                reduced, self._initial_iterate(reduced, start, centred), budget
            )
            iterations += attempt.iterations
            budget -= attempt.iterations
            if best is None or attempt.converged or attempt.worst < best.worst:
                best = attempt
            if attempt.converged or not attempt.stalled or budget <= 0:
                break
            logger.debug(
                "QP stalled after %d iterations (residual %.2e), restarting",
                attempt.iterations,
                attempt.worst,
            )
        assert best is not None

        status = QpStatus.OPTIMAL if best.converged else QpStatus.ITERATION_LIMIT
        kkt = best.kkt
        primal, ineq_duals, eq_duals, lower_duals, upper_duals = best.full
        logger.debug(
            "QP %s after %d iterations (stationarity %.2e, primal %.2e, gap %.2e)",
            status,
            iterations,
            kkt.stationarity,
            kkt.primal,
            kkt.complementarity,
        )
        return QpSolution(
            status=status,
            primal=primal,
            ineq_duals=ineq_duals,
            eq_duals=eq_duals,
            lower_duals=lower_duals,
            upper_duals=upper_duals,
            objective=problem.objective(primal),
            iterations=iterations,
            kkt=kkt,
        )

    def _attempt(
        self, reduced: _ReducedProblem, point: _Iterate, budget: int
    ) -> _Attempt:
        """Runs predictor-corrector iterations from one start until the KKT residuals
        are certified, the budget runs out or progress stalls."""
        n_pairs = point.s.size + 2 * reduced.n
        full, kkt = self._certify(reduced, point)
        reference = kkt.max()
        since_progress = 0
        short_steps = 0
        iteration = 0
        while True:
            if kkt.within(self._kkt_tol):
                return _Attempt(full, kkt, iteration, converged=True, stalled=False)
            if iteration >= budget or n_pairs == 0:
                return _Attempt(full, kkt, iteration, converged=False, stalled=False)
            if (
                short_steps >= STALL_LIMIT
                or since_progress >= STALL_WINDOW
                or not _is_interior(reduced, point)
            ):
                return _Attempt(full, kkt, iteration, converged=False, stalled=True)
            try:
                system = _NewtonSystem(reduced, point)
                direction, alpha = self._predictor_corrector(system, point, n_pairs)
            except RuntimeError as err:
                logger.debug("KKT factorisation failed at %d: %s", iteration, err)
                return _Attempt(full, kkt, iteration, converged=False, stalled=True)
            if not np.isfinite(alpha):
                return _Attempt(full, kkt, iteration, converged=False, stalled=True)
            short_steps = short_steps + 1 if alpha < STALL_STEP else 0
            point = _Iterate(
                z=point.z + alpha * direction.z,
                s=point.s + alpha * direction.s,
                lam=point.lam + alpha * direction.lam,
                nu=point.nu + alpha * direction.nu,
                lower=point.lower + alpha * direction.lower,
                upper=point.upper + alpha * direction.upper,
            )
            iteration += 1
            full, kkt = self._certify(reduced, point)
            if kkt.max() < PROGRESS_FACTOR * reference:
                reference = kkt.max()
                since_progress = 0
            else:
                since_progress += 1

    def _predictor_corrector(
        self, system: _NewtonSystem, point: _Iterate, n_pairs: int
    ) -> tuple[_Direction, float]:
        products = (
            point.s * point.lam,
            system.lower_gap * point.lower,
            system.upper_gap * point.upper,
        )
        mu = sum(float(p.sum()) for p in products) / n_pairs

        affine = system.solve(-products[0], -products[1], -products[2])
        alpha_affine = system.step_length(affine)
        mu_affine = (
            float(
                (point.s + alpha_affine * affine.s)
                @ (point.lam + alpha_affine * affine.lam)
            )
            + float(
                (system.lower_gap + alpha_affine * affine.z)
                @ (point.lower + alpha_affine * affine.lower)
            )
            + float(
                (system.upper_gap - alpha_affine * affine.z)
                @ (point.upper + alpha_affine * affine.upper)
            )
        ) / n_pairs
        centering = (mu_affine / mu) ** 3 * mu if mu > 0 else 0.0

        corrected = system.solve(
            centering - products[0] - affine.s * affine.lam,
            centering - products[1] - affine.z * affine.lower,
            centering - products[2] + affine.z * affine.upper,
        )
        alpha = system.step_length(corrected)
        if alpha < CORRECTOR_FALLBACK * alpha_affine:
            # second-order correction blocks the step, fall back to a centred one
            target = max(centering, CENTRING_FLOOR * mu)
            corrected = system.solve(
                target - products[0], target - products[1], target - products[2]
            )
            alpha = system.step_length(corrected)
        return corrected, min(1.0, STEP_TO_BOUNDARY * alpha)


def solve_qp(
    problem: QpProblem,
    kkt_tol: float = 1e-6,
    max_iter: int = 500,
    initial_guess: NDArray[np.float64] | None = None,
) -> QpSolution:
    return QpSolver(kkt_tol=kkt_tol, max_iter=max_iter).solve(problem, initial_guess)
