"""LSQR (Golub-Kahan bidiagonalization) with a right preconditioning factor."""

import logging
import time

import numpy as np
from scipy.sparse.linalg import LinearOperator

from ..protocols import EventCallback, RightFactor
from .operators import OperatorLike, as_operator
from .report import KrylovConfig, SolveReport, Termination

logger = logging.getLogger(__name__)


def _sym_ortho(a: float, b: float) -> tuple[float, float, float]:
    """Stable Givens rotation: (c, s, r) with c*a + s*b = r."""
    if b == 0:
        return float(np.sign(a)), 0.0, abs(a)
    if a == 0:
        return 0.0, float(np.sign(b)), abs(b)
    if abs(b) > abs(a):
        tau = a / b
        s = np.sign(b) / np.sqrt(1 + tau * tau)
        c = s * tau
        r = b / s
    else:
        tau = b / a
        c = np.sign(a) / np.sqrt(1 + tau * tau)
        s = c * tau
        r = a / c
    return float(c), float(s), float(r)


def lsqr(
    a: OperatorLike,
    b: np.ndarray,
    *,
    factor: RightFactor | None = None,
    config: KrylovConfig | None = None,
    event_callback: EventCallback | None = None,
) -> SolveReport:
    """
    Solve A x = b with LSQR applied to A P^{-1} y = b, returning x = P^{-1} y.

    In exact arithmetic the iterates equal those of cgne with G = P^T P. The
    history holds the true residual ||A x_k - b||_2 at every step.

    Args:
        a: Square nonsingular A
        b: Right-hand side
        factor: Right factor P with solve / solve_transpose (identity when omitted)
        config: Stopping rule
        event_callback: Receives solver events
    """
    cfg = config or KrylovConfig()
    A = as_operator(a)
    n = A.shape[1]
    b = np.asarray(b, dtype=float)
    start = time.perf_counter()

    if factor is None:
        p_solve = pt_solve = lambda r: r
    else:
        p_solve, pt_solve = factor.solve, factor.solve_transpose
    abar = LinearOperator(
        A.shape,
        matvec=lambda y: A.matvec(p_solve(np.ravel(y))),
        rmatvec=lambda u: pt_solve(A.rmatvec(np.ravel(u))),
        dtype=float,
    )

    x0 = cfg.initial_guess(n)
    y = np.zeros(n)
    u = b - A.matvec(x0)
    history = [float(np.linalg.norm(u))]
    iterates = [x0.copy()] if cfg.keep_iterates else None
    x = x0.copy()

    if event_callback:
        event_callback("solve:start", {"solver": "lsqr", "n": n, "tol_abs": cfg.tol_abs, "res0": history[0]})
    logger.info(f"lsqr: n={n}, tol_abs={cfg.tol_abs:.1e}, max_iter={cfg.max_iter}, res0={history[0]:.3e}")

    termination = Termination.MAX_ITER
    iterations = 0
    beta = history[0]
    alfa = 0.0
    v = np.zeros(n)
    if history[0] < cfg.tol_abs:
        termination = Termination.RESIDUAL_TOL
    else:
        u /= beta
        v = abar.rmatvec(u)
        alfa = float(np.linalg.norm(v))
        if alfa == 0.0:
            termination = Termination.BREAKDOWN
        else:
            v /= alfa
    w = v.copy()
    rhobar, phibar = alfa, beta

    if termination == Termination.MAX_ITER:
        for k in range(cfg.max_iter):
            u = abar.matvec(v) - alfa * u
            beta = float(np.linalg.norm(u))
            if beta > 0:
                u /= beta
                v = abar.rmatvec(u) - beta * v
                alfa = float(np.linalg.norm(v))
                if alfa > 0:
                    v /= alfa

            c, s, rho = _sym_ortho(rhobar, beta)
            theta = s * alfa
            rhobar = -c * alfa
            phi = c * phibar
            phibar = s * phibar

            y += (phi / rho) * w
            w = v - (theta / rho) * w

            x = x0 + p_solve(y)
            res = float(np.linalg.norm(b - A.matvec(x)))
            iterations = k + 1
            history.append(res)
            if iterates is not None:
                iterates.append(x.copy())
            if event_callback:
                event_callback("solve:step", {"solver": "lsqr", "step": iterations, "res": res})
            if res < cfg.tol_abs:
                termination = Termination.RESIDUAL_TOL
                break
            if beta == 0.0 or alfa == 0.0:
                logger.warning(f"lsqr: bidiagonalization broke down at step {iterations} (res={res:.3e})")
                termination = Termination.BREAKDOWN
                break

    if termination == Termination.MAX_ITER:
        logger.warning(f"lsqr: no convergence in {cfg.max_iter} iterations (res={history[-1]:.3e})")
    report = SolveReport(
        solver="lsqr",
        iterations=iterations,
        converged=termination == Termination.RESIDUAL_TOL,
        termination=termination,
        residual_history=history,
        solution=x,
        wall_time=time.perf_counter() - start,
        tol_abs=cfg.tol_abs,
        iterates=iterates,
    )
    if event_callback:
        event_callback("solve:end", report.summary())
    logger.info(f"lsqr: {termination.value} after {iterations} iterations (res={history[-1]:.3e})")
    return report
