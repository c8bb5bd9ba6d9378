"""Iterative refinement around any Krylov solve."""

import logging
import time
from collections.abc import Callable

import numpy as np

from ..errors import ConfigError
from .operators import OperatorLike, as_operator
from .report import SolveReport, Termination

logger = logging.getLogger(__name__)


def iterative_refinement(
    solve: Callable[[np.ndarray], SolveReport],
    a: OperatorLike,
    b: np.ndarray,
    steps: int,
    *,
    tol_abs: float | None = None,
) -> SolveReport:
    """
    Repeat x <- x + solve(b - A x) starting from x = 0.

    ``solve`` receives the current residual as right-hand side and must start
    from a zero initial guess, so its residual history measures ||b - A(x + d_k)||
    and the inner histories concatenate into one true-residual history.

    Args:
        solve: Inner solver closure r -> SolveReport for A d = r
        a: The operator A
        b: Right-hand side
        steps: Number of refinement sweeps (>= 1)
        tol_abs: Skip remaining sweeps once ||b - A x|| is below this
    """
    if steps < 1:
        raise ConfigError(f"iterative_refinement needs steps >= 1, got {steps}")
    A = as_operator(a)
    b = np.asarray(b, dtype=float)
    start = time.perf_counter()

    x = np.zeros(A.shape[1])
    history = [float(np.linalg.norm(b))]
    sweep_residuals: list[float] = []
    iterations = 0
    last: SolveReport | None = None
    for sweep in range(steps):
        r = b - A.matvec(x)
        res = float(np.linalg.norm(r))
        if tol_abs is not None and res < tol_abs:
            break
        last = solve(r)
        x = x + last.solution
        history.extend(last.residual_history[1:])
        iterations += last.iterations
        sweep_residuals.append(float(np.linalg.norm(b - A.matvec(x))))
        logger.info(f"refinement sweep {sweep + 1}: inner iterations={last.iterations}, res={sweep_residuals[-1]:.3e}")

    final = float(np.linalg.norm(b - A.matvec(x)))
    if tol_abs is not None:
        converged = final < tol_abs
    else:
        converged = last is None or last.converged
        tol_abs = last.tol_abs if last is not None else 0.0
    if converged:
        termination = Termination.RESIDUAL_TOL
    elif last is not None and last.termination != Termination.RESIDUAL_TOL:
        termination = last.termination
    else:
        termination = Termination.MAX_ITER
    report = SolveReport(
        solver=f"refined-{last.solver}" if last else "refined",
        iterations=iterations,
        converged=converged,
        termination=termination,
        residual_history=history,
        solution=x,
        wall_time=time.perf_counter() - start,
        tol_abs=tol_abs,
    )
    report.extras["sweep_residuals"] = sweep_residuals
    return report
