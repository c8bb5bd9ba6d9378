"""Full (unrestarted) GMRES with right preconditioning.

Arnoldi with modified Gram-Schmidt and a Givens-rotated Hessenberg least-squares
problem, as in Kelley's "Iterative Methods for Linear and Nonlinear Equations".
"""

import logging
import time

import numpy as np
import scipy.linalg as sla

from ..errors import BasisLimitError
from ..protocols import EventCallback
from .cg import PreconditionerLike, as_inverse
from .operators import OperatorLike, as_operator
from .report import KrylovConfig, Monitor, SolveReport, Termination

logger = logging.getLogger(__name__)

HAPPY_BREAKDOWN_TOL = 1e-14
REORTH_TOL = 1e-8
_CHUNK = 128


class _Basis:
    """Krylov basis stored row-wise, grown in chunks."""

    def __init__(self, n: int):
        self.n = n
        self.rows = np.zeros((_CHUNK, n))
        self.size = 0

    def append(self, v: np.ndarray) -> None:
        if self.size == self.rows.shape[0]:
            grown = np.zeros((2 * self.rows.shape[0], self.n))
            grown[: self.size] = self.rows[: self.size]
            self.rows = grown
        self.rows[self.size] = v
        self.size += 1

    def view(self, k: int) -> np.ndarray:
        return self.rows[:k]


def _grow(hess: np.ndarray) -> np.ndarray:
    rows, cols = hess.shape
    grown = np.zeros((2 * cols + 1, 2 * cols))
    grown[:rows, :cols] = hess
    return grown


def _apply_rotations(h: np.ndarray, c: np.ndarray, s: np.ndarray, j: int) -> None:
    for i in range(j):
        temp = c[i] * h[i] - s[i] * h[i + 1]
        h[i + 1] = s[i] * h[i] + c[i] * h[i + 1]
        h[i] = temp


def gmres(
    a: OperatorLike,
    b: np.ndarray,
    *,
    preconditioner: PreconditionerLike = None,
    config: KrylovConfig | None = None,
    event_callback: EventCallback | None = None,
) -> SolveReport:
    """
    Solve A x = b by GMRES on A M^{-1} y = b, x = x0 + M^{-1} y.

    With right preconditioning the minimized residual is the true residual. Under
    ``Monitor.TRUE_RESIDUAL`` the iterate is formed and ||b - A x_k|| recomputed
    every step; ``Monitor.RECURRENCE`` records the least-squares estimate and only
    checks the true residual before declaring convergence.

    Raises:
        BasisLimitError: when ``config.max_basis`` would be exceeded
    """
    cfg = config or KrylovConfig()
    A = as_operator(a)
    m_inv = as_inverse(preconditioner)
    n = A.shape[0]
    b = np.asarray(b, dtype=float)
    start = time.perf_counter()

    x0 = cfg.initial_guess(n)
    r0 = b - A.matvec(x0)
    beta = float(np.linalg.norm(r0))
    history = [beta]
    iterates = [x0.copy()] if cfg.keep_iterates else None
    x = x0.copy()
    b_norm = max(float(np.linalg.norm(b)), 1e-300)

    if event_callback:
        event_callback("solve:start", {"solver": "gmres", "n": n, "tol_abs": cfg.tol_abs, "res0": beta})
    logger.info(f"gmres: n={n}, tol_abs={cfg.tol_abs:.1e}, max_iter={cfg.max_iter}, res0={beta:.3e}")

    termination = Termination.MAX_ITER
    iterations = 0
    if beta < cfg.tol_abs:
        termination = Termination.RESIDUAL_TOL
    else:
        basis = _Basis(n)
        basis.append(r0 / beta)
        cap = cfg.max_iter
        hess = np.zeros((_CHUNK + 1, _CHUNK))
        c = np.zeros(cap)
        s = np.zeros(cap)
        g = np.zeros(cap + 1)
        g[0] = beta

        def form_iterate(k: int) -> np.ndarray:
            y = sla.solve_triangular(hess[:k, :k], g[:k])
            return x0 + m_inv(basis.view(k).T @ y)

        for j in range(cap):
            if cfg.max_basis is not None and j + 1 > cfg.max_basis:
                raise BasisLimitError(f"GMRES basis limit {cfg.max_basis} reached at step {j}")
            w = A.matvec(m_inv(basis.rows[j]))
            h = np.zeros(j + 2)
            for i in range(j + 1):
                vi = basis.rows[i]
                h[i] = vi @ w
                w -= h[i] * vi
            w_norm = float(np.linalg.norm(w))
            probe = basis.view(j + 1) @ w
            if np.abs(probe).max() > REORTH_TOL * max(w_norm, 1e-300):
                w -= basis.view(j + 1).T @ probe
                h[: j + 1] += probe
                w_norm = float(np.linalg.norm(w))
            h[j + 1] = w_norm
            if j + 1 >= hess.shape[1]:
                hess = _grow(hess)
            happy = w_norm < HAPPY_BREAKDOWN_TOL * b_norm
            if not happy:
                basis.append(w / w_norm)

            _apply_rotations(h, c, s, j)
            nu = np.hypot(h[j], h[j + 1])
            if nu == 0.0:
                logger.warning(f"gmres: singular Hessenberg column at step {j}")
                termination = Termination.BREAKDOWN
                break
            c[j] = h[j] / nu
            s[j] = -h[j + 1] / nu
            h[j] = c[j] * h[j] - s[j] * h[j + 1]
            h[j + 1] = 0.0
            g[j + 1] = s[j] * g[j]
            g[j] *= c[j]
            hess[: j + 2, j] = h

            iterations = j + 1
            if cfg.monitor == Monitor.TRUE_RESIDUAL or abs(g[j + 1]) < cfg.tol_abs or happy:
                x = form_iterate(iterations)
                res = float(np.linalg.norm(b - A.matvec(x)))
            else:
                res = abs(float(g[j + 1]))
            history.append(res)
            if iterates is not None:
                iterates.append(form_iterate(iterations))
            if event_callback:
                event_callback("solve:step", {"solver": "gmres", "step": iterations, "res": res})
            if res < cfg.tol_abs:
                termination = Termination.RESIDUAL_TOL
                break
            if happy:
                logger.warning(f"gmres: invariant subspace found at step {iterations} but res={res:.3e}")
                termination = Termination.BREAKDOWN
                break
        if termination == Termination.MAX_ITER and cfg.monitor == Monitor.RECURRENCE:
            x = form_iterate(iterations)
            history[-1] = float(np.linalg.norm(b - A.matvec(x)))

    if termination == Termination.MAX_ITER:
        logger.warning(f"gmres: no convergence in {cfg.max_iter} iterations (res={history[-1]:.3e})")
    report = SolveReport(
        solver="gmres",
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
    logger.info(f"gmres: {termination.value} after {iterations} iterations (res={history[-1]:.3e})")
    return report
