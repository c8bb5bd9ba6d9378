"""Preconditioner handles: the "apply G^{-1}" contract and its realizations."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from functools import singledispatch
from typing import Any

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator

from ..errors import ConfigError, ConvergenceError, DimensionError
from ..krylov import KrylovConfig, Termination, as_operator, pcg
from ..matkit import (
    BandedQrFactor,
    CsrMatrix,
    DenseMatrix,
    PolarFactor,
    QrFactor,
    RqFactor,
    Tridiagonal,
    banded_lu,
    cholesky,
)
from ..protocols import WeightOperator

logger = logging.getLogger(__name__)

Solve = Callable[[np.ndarray], np.ndarray]


class Symmetry(str, Enum):
    EXACT = "exactly-symmetric"
    BY_CONSTRUCTION = "symmetric-by-construction"
    UNSYMMETRIC = "unsymmetric"  # right preconditioners for gmres only


class DirectMethod(str, Enum):
    CHOLESKY = "cholesky"
    BANDED_LU = "lu"


@dataclass(frozen=True)
class PreconditionerHandle:
    """r -> G^{-1} r with a symmetry certificate."""

    apply_inverse: Solve
    symmetry: Symmetry
    description: str
    reentrant: bool = True

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.apply_inverse(r)

    def as_operator(self, n: int) -> LinearOperator:
        return LinearOperator((n, n), matvec=lambda r: self.apply_inverse(np.ravel(r)), dtype=float)


def identity_preconditioner() -> PreconditionerHandle:
    return PreconditionerHandle(lambda r: np.array(r, dtype=float), Symmetry.EXACT, "identity")


def right_preconditioner(solve: Solve, description: str) -> PreconditionerHandle:
    """Unsymmetric M^{-1} for gmres right preconditioning."""
    return PreconditionerHandle(solve, Symmetry.UNSYMMETRIC, description)


# =============================================================================
# Factor-based normal preconditioners
# =============================================================================


@dataclass(frozen=True)
class FactorSolver:
    """A nonsingular factor P given by its solves (and, optionally, products)."""

    solve: Solve
    solve_transpose: Solve
    n: int
    matvec: Solve | None = None
    rmatvec: Solve | None = None
    description: str = "P"


@singledispatch
def factor_solver(p) -> FactorSolver:
    """Adapt a factor (matrix or factorization) to forward / transpose solves."""
    raise TypeError(f"cannot use {type(p).__name__} as a preconditioning factor")


@factor_solver.register
def _(p: FactorSolver) -> FactorSolver:
    return p


@factor_solver.register
def _(p: Tridiagonal) -> FactorSolver:
    return FactorSolver(p.solve, p.solve_transpose, p.n, p.matvec, p.rmatvec, "tridiagonal P")


@factor_solver.register
def _(p: BandedQrFactor) -> FactorSolver:
    return FactorSolver(p.r_solve, p.r_solve_transpose, p.n, p.r_matvec, p.r_rmatvec, "banded R of QR")


def _triangular(r: np.ndarray, description: str) -> FactorSolver:
    return FactorSolver(
        solve=lambda b: sla.solve_triangular(r, b, lower=False),
        solve_transpose=lambda b: sla.solve_triangular(r, b, lower=False, trans="T"),
        n=r.shape[0],
        matvec=lambda x: r @ x,
        rmatvec=lambda x: r.T @ x,
        description=description,
    )


@factor_solver.register
def _(p: QrFactor) -> FactorSolver:
    return _triangular(p.r, "R of QR")


@factor_solver.register
def _(p: RqFactor) -> FactorSolver:
    return _triangular(p.r, "R of RQ")


@factor_solver.register
def _(p: PolarFactor) -> FactorSolver:
    h = p.h
    cf = sla.cho_factor(h)
    return FactorSolver(
        solve=lambda b: sla.cho_solve(cf, b),
        solve_transpose=lambda b: sla.cho_solve(cf, b),
        n=h.shape[0],
        matvec=lambda x: h @ x,
        rmatvec=lambda x: h @ x,
        description="polar factor H",
    )


@factor_solver.register(np.ndarray)
@factor_solver.register(DenseMatrix)
def _(p) -> FactorSolver:
    arr = p.values if isinstance(p, DenseMatrix) else np.asarray(p, dtype=float)
    lu = sla.lu_factor(arr)
    return FactorSolver(
        solve=lambda b: sla.lu_solve(lu, b),
        solve_transpose=lambda b: sla.lu_solve(lu, b, trans=1),
        n=arr.shape[0],
        matvec=lambda x: arr @ x,
        rmatvec=lambda x: arr.T @ x,
        description="dense P",
    )


@factor_solver.register
def _(p: CsrMatrix) -> FactorSolver:
    f = banded_lu(p)
    return FactorSolver(
        solve=f.solve,
        solve_transpose=lambda b: f.solve(b, transpose=True),
        n=p.rows,
        matvec=p.matvec,
        rmatvec=p.rmatvec,
        description="sparse P (banded LU)",
    )


@dataclass(frozen=True)
class FactorNormalPrec:
    """
    G = P^T T P applied as G^{-1} = P^{-1} T^{-1} P^{-T}.

    ``weight`` supplies T (apply) and T^{-1} (apply_inverse); None means T = I.
    """

    factor: FactorSolver
    weight: WeightOperator | None = None

    def apply_inverse(self, r: np.ndarray) -> np.ndarray:
        z = self.factor.solve_transpose(r)
        if self.weight is not None:
            z = self.weight.apply_inverse(z)
        return self.factor.solve(z)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """G x = P^T T P x (needs the factor's products)."""
        if self.factor.matvec is None or self.factor.rmatvec is None:
            raise ConfigError(f"{self.factor.description} has no forward product")
        z = self.factor.matvec(x)
        if self.weight is not None:
            z = self.weight.apply(z)
        return self.factor.rmatvec(z)

    # RightFactor protocol (lsqr)
    def solve(self, r: np.ndarray) -> np.ndarray:
        return self.factor.solve(r)

    def solve_transpose(self, r: np.ndarray) -> np.ndarray:
        return self.factor.solve_transpose(r)

    def handle(self) -> PreconditionerHandle:
        weighted = "" if self.weight is None else " T^{-1}"
        return PreconditionerHandle(
            self.apply_inverse, Symmetry.BY_CONSTRUCTION, f"P^{{-1}}{weighted} P^{{-T}} ({self.factor.description})"
        )


def normal_factor(p: Any, weight: WeightOperator | None = None) -> FactorNormalPrec:
    return FactorNormalPrec(factor_solver(p), weight)


def from_factor(p: Any, weight: WeightOperator | None = None) -> PreconditionerHandle:
    """Handle applying P^{-1} T^{-1} P^{-T} (P^{-1} P^{-T} when ``weight`` is None)."""
    return normal_factor(p, weight).handle()


# =============================================================================
# Direct inverses of assembled SPD matrices
# =============================================================================


@singledispatch
def from_spd_matrix(g, method: DirectMethod | str = DirectMethod.CHOLESKY) -> PreconditionerHandle:
    """Exact inverse of an assembled SPD matrix through a direct factorization."""
    raise TypeError(f"cannot factor {type(g).__name__}")


@from_spd_matrix.register
def _(g: CsrMatrix, method: DirectMethod | str = DirectMethod.CHOLESKY) -> PreconditionerHandle:
    method = DirectMethod(method)
    if method == DirectMethod.CHOLESKY:
        f = cholesky(g)
        return PreconditionerHandle(f.solve, Symmetry.EXACT, f"banded Cholesky (n={g.rows}, bw={f.bandwidth})")
    lu = banded_lu(g)
    return PreconditionerHandle(lu.solve, Symmetry.EXACT, f"banded LU (n={g.rows}, kl={lu.kl}, ku={lu.ku})")


@from_spd_matrix.register(np.ndarray)
@from_spd_matrix.register(DenseMatrix)
def _(g, method: DirectMethod | str = DirectMethod.CHOLESKY) -> PreconditionerHandle:
    arr = g.values if isinstance(g, DenseMatrix) else np.asarray(g, dtype=float)
    method = DirectMethod(method)
    if method == DirectMethod.CHOLESKY:
        cf = sla.cho_factor(arr)
        return PreconditionerHandle(lambda r: sla.cho_solve(cf, r), Symmetry.EXACT, f"dense Cholesky (n={len(arr)})")
    lu = sla.lu_factor(arr)
    return PreconditionerHandle(lambda r: sla.lu_solve(lu, r), Symmetry.EXACT, f"dense LU (n={len(arr)})")


# =============================================================================
# Inner-CG application for matrix-free SPD operators
# =============================================================================


@dataclass
class InnerSolveStats:
    applications: int = 0
    iterations: int = 0
    worst_residual: float = 0.0


@dataclass
class InnerCgPreconditioner:
    """
    G^{-1} r by an inner CG solve to relative tolerance ``tol``.

    Not reentrant: ``stats`` is updated on every application.
    """

    operator: LinearOperator
    tol: float = 1e-10
    max_iter: int = 500
    inner_preconditioner: PreconditionerHandle | None = None
    strict: bool = False
    stats: InnerSolveStats = field(default_factory=InnerSolveStats)

    def apply_inverse(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        r_norm = float(np.linalg.norm(r))
        if r_norm == 0.0:
            return np.zeros_like(r)
        cfg = KrylovConfig(tol_abs=self.tol * r_norm, max_iter=self.max_iter)
        rep = pcg(self.operator, r, preconditioner=self.inner_preconditioner, config=cfg, solver_name="inner-cg")
        self.stats.applications += 1
        self.stats.iterations += rep.iterations
        relative = rep.final_residual / r_norm
        self.stats.worst_residual = max(self.stats.worst_residual, relative)
        if rep.termination != Termination.RESIDUAL_TOL:
            if self.strict:
                raise ConvergenceError(f"inner CG stopped with {rep.termination.value}", relative)
            logger.warning(f"inner CG stopped with {rep.termination.value} at relative residual {relative:.3e}")
        return rep.solution

    def handle(self) -> PreconditionerHandle:
        return PreconditionerHandle(
            self.apply_inverse,
            Symmetry.BY_CONSTRUCTION,
            f"inner CG (tol={self.tol:.0e}, max={self.max_iter})",
            reentrant=False,
        )


def from_spd_operator(
    g,
    inner_tol: float = 1e-10,
    inner_max: int = 500,
    *,
    inner_preconditioner: PreconditionerHandle | None = None,
    strict: bool = False,
) -> PreconditionerHandle:
    """Inverse of a matrix-free SPD operator applied by inner CG (not reentrant)."""
    op = as_operator(g)
    if op.shape[0] != op.shape[1]:
        raise DimensionError(f"SPD operator must be square, got {op.shape}")
    return InnerCgPreconditioner(op, inner_tol, inner_max, inner_preconditioner, strict).handle()


# =============================================================================
# SPD probe
# =============================================================================


@dataclass(frozen=True)
class SpdProbeResult:
    symmetry_defect: float
    min_positivity: float

    @property
    def passed(self) -> bool:
        return self.symmetry_defect <= 1e-9 and self.min_positivity > 0.0


def probe_spd(apply: Callable[[np.ndarray], np.ndarray], n: int, *, probes: int = 32, seed: int = 0) -> SpdProbeResult:
    """
    Random-probe check of symmetry and positivity of r -> apply(r).

    Symmetry defect is max |<Gu, v> - <u, Gv>| / (||Gu|| ||v|| + ||u|| ||Gv||);
    positivity is min <Gu, u> / (||u|| ||Gu||).
    """
    rng = np.random.default_rng(seed)
    worst_sym = 0.0
    min_pos = np.inf
    for _ in range(probes):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        gu, gv = apply(u), apply(v)
        scale = np.linalg.norm(gu) * np.linalg.norm(v) + np.linalg.norm(u) * np.linalg.norm(gv)
        worst_sym = max(worst_sym, abs(float(gu @ v) - float(u @ gv)) / max(scale, 1e-300))
        min_pos = min(min_pos, float(gu @ u) / max(np.linalg.norm(u) * np.linalg.norm(gu), 1e-300))
    return SpdProbeResult(symmetry_defect=worst_sym, min_positivity=min_pos)
