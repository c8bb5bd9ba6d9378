"""Preconditioned conjugate gradients and CG on the (weighted) normal equations."""

import logging
import time
from collections.abc import Callable

import numpy as np

from ..errors import ConfigError
from ..protocols import EventCallback, InverseApplier, WeightOperator
from .operators import OperatorLike, as_operator, normal_operator, weight_operator
from .report import KrylovConfig, SolveReport, Termination

logger = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-14

PreconditionerLike = InverseApplier | Callable[[np.ndarray], np.ndarray] | None


def as_inverse(g: PreconditionerLike, *, require_symmetric: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a preconditioner argument to a plain callable r -> G^{-1} r."""
    if g is None:
        return lambda r: r.copy()
    if require_symmetric and getattr(getattr(g, "symmetry", None), "value", None) == "unsymmetric":
        raise ConfigError(f"CG needs a symmetric preconditioner, got '{getattr(g, 'description', g)}'")
    apply = getattr(g, "apply_inverse", None)
    if apply is not None:
        return apply
    if callable(g):
        return g
    raise ConfigError(f"not a preconditioner: {g!r}")


def pcg(
    b_op: OperatorLike,
    rhs: np.ndarray,
    *,
    preconditioner: PreconditionerLike = None,
    config: KrylovConfig | None = None,
    residual_fn: Callable[[np.ndarray], float] | None = None,
    t_norm_fn: Callable[[np.ndarray], float] | None = None,
    event_callback: EventCallback | None = None,
    solver_name: str = "pcg",
) -> SolveReport:
    """
    Preconditioned conjugate gradients for an SPD operator B.

    The monitored residual is ``residual_fn(x_k)`` when given (cgne passes the
    true residual ||A x_k - b||), otherwise ||rhs - B x_k|| recomputed explicitly.

    Args:
        b_op: SPD operator B
        rhs: Right-hand side
        preconditioner: SPD G^{-1} (handle, callable, or None for identity)
        config: Stopping rule
        residual_fn: Monitored residual of an iterate
        t_norm_fn: Optional extra history, stored in extras["t_residual_history"]
        event_callback: Receives solve:start / solve:step / solve:end
        solver_name: Label used in the report and events

    Returns:
        SolveReport; breakdown and max-iter are reported, not raised
    """
    cfg = config or KrylovConfig()
    B = as_operator(b_op)
    g_inv = as_inverse(preconditioner, require_symmetric=True)
    n = B.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    start = time.perf_counter()

    x = cfg.initial_guess(n)
    r = rhs - B.matvec(x)
    monitor = residual_fn or (lambda xk: float(np.linalg.norm(rhs - B.matvec(xk))))
    history = [monitor(x)]
    t_history = [t_norm_fn(x)] if t_norm_fn else None
    iterates = [x.copy()] if cfg.keep_iterates else None

    if event_callback:
        event_callback("solve:start", {"solver": solver_name, "n": n, "tol_abs": cfg.tol_abs, "res0": history[0]})
    logger.info(f"{solver_name}: n={n}, tol_abs={cfg.tol_abs:.1e}, max_iter={cfg.max_iter}, res0={history[0]:.3e}")

    termination = Termination.MAX_ITER
    iterations = 0
    if history[0] < cfg.tol_abs:
        termination = Termination.RESIDUAL_TOL
    else:
        z = g_inv(r)
        rz = float(r @ z)
        p = z.copy()
        for k in range(cfg.max_iter):
            bp = B.matvec(p)
            pbp = float(p @ bp)
            # curvature relative to |p| |Bp|, the Cauchy-Schwarz bound on p^T B p
            if pbp <= BREAKDOWN_TOL * float(np.linalg.norm(p) * np.linalg.norm(bp)) or rz <= 0.0:
                logger.warning(f"{solver_name}: breakdown at step {k} (p^T B p = {pbp:.3e}, r^T z = {rz:.3e})")
                termination = Termination.BREAKDOWN
                break
            alpha = rz / pbp
            x += alpha * p
            r -= alpha * bp
            iterations = k + 1
            res = monitor(x)
            history.append(res)
            if t_history is not None:
                t_history.append(t_norm_fn(x))  # type: ignore[misc]
            if iterates is not None:
                iterates.append(x.copy())
            if event_callback:
                event_callback("solve:step", {"solver": solver_name, "step": iterations, "res": res})
            if res < cfg.tol_abs:
                termination = Termination.RESIDUAL_TOL
                break
            z = g_inv(r)
            rz_new = float(r @ z)
            beta = rz_new / rz
            rz = rz_new
            p = z + beta * p

    converged = termination == Termination.RESIDUAL_TOL
    if termination == Termination.MAX_ITER:
        logger.warning(f"{solver_name}: no convergence in {cfg.max_iter} iterations (res={history[-1]:.3e})")
    report = SolveReport(
        solver=solver_name,
        iterations=iterations,
        converged=converged,
        termination=termination,
        residual_history=history,
        solution=x,
        wall_time=time.perf_counter() - start,
        tol_abs=cfg.tol_abs,
        iterates=iterates,
    )
    if t_history is not None:
        report.extras["t_residual_history"] = t_history
    if event_callback:
        event_callback("solve:end", report.summary())
    logger.info(f"{solver_name}: {termination.value} after {iterations} iterations (res={history[-1]:.3e})")
    return report


def cgne(
    a: OperatorLike,
    b: np.ndarray,
    *,
    riesz: WeightOperator | None = None,
    preconditioner: PreconditionerLike = None,
    config: KrylovConfig | None = None,
    record_t_norm: bool = False,
    event_callback: EventCallback | None = None,
) -> SolveReport:
    """
    Left-preconditioned CG on the weighted normal equations A^T T A x = A^T T b.

    Stopping and history use the true residual ||A x_k - b||_2.

    Args:
        a: Square nonsingular A
        b: Right-hand side of A x = b
        riesz: Weight T (identity when omitted)
        preconditioner: SPD G^{-1}, typically P^{-1} T^{-1} P^{-T}
        config: Stopping rule
        record_t_norm: Also record ||A x_k - b||_T in extras["t_residual_history"]
        event_callback: Receives solver events
    """
    A = as_operator(a)
    b = np.asarray(b, dtype=float)
    B = normal_operator(A, riesz)
    t_op = weight_operator(riesz, A.shape[0]) if riesz is not None else None
    tb = t_op.matvec(b) if t_op is not None else b
    rhs = A.rmatvec(tb)

    def true_residual(x: np.ndarray) -> float:
        return float(np.linalg.norm(b - A.matvec(x)))

    t_norm_fn = None
    if record_t_norm:

        def t_norm_fn(x: np.ndarray) -> float:
            r = b - A.matvec(x)
            tr = t_op.matvec(r) if t_op is not None else r
            return float(np.sqrt(max(float(r @ tr), 0.0)))

    return pcg(
        B,
        rhs,
        preconditioner=preconditioner,
        config=config,
        residual_fn=true_residual,
        t_norm_fn=t_norm_fn,
        event_callback=event_callback,
        solver_name="cgne",
    )
