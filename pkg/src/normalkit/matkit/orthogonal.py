"""Orthogonal factorizations: QR (Householder and Givens), RQ, polar, and a symmetric eigensolver."""

import logging
from dataclasses import dataclass
from functools import singledispatch

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import AsymmetryError, ConvergenceError, DimensionError, RankDeficiencyError
from .factorize import SYMMETRY_TOL
from .storage import NORM_FLOOR, CsrMatrix, DenseMatrix, Tridiagonal, _check_vector

logger = logging.getLogger(__name__)

RANK_TOL = 1e-14
POLAR_TOL = 1e-13
POLAR_MAX_ITER = 100


def _dense(a: DenseMatrix | np.ndarray) -> np.ndarray:
    arr = a.values if isinstance(a, DenseMatrix) else np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _check_rank(diag: np.ndarray, norm: float) -> None:
    threshold = RANK_TOL * max(norm, NORM_FLOOR)
    small = np.abs(diag) < threshold
    if np.any(small):
        idx = int(np.argmax(small))
        raise RankDeficiencyError(idx, float(abs(diag[idx])), threshold)


@dataclass(frozen=True)
class QrFactor:
    """A = Q R with R upper triangular and nonnegative diagonal."""

    q: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.r.shape[0]


@dataclass(frozen=True)
class BandedQrFactor:
    """
    Givens QR of a tridiagonal matrix.

    R is upper triangular with two superdiagonals, held in (0, 2) band storage
    (``r_band[2 + i - j, j] = R[i, j]``). Q^T is the product of the rotations
    G_{n-2} ... G_0 followed by a sign flip of the last row.
    """

    r_band: np.ndarray
    cosines: np.ndarray
    sines: np.ndarray
    last_sign: float

    @property
    def n(self) -> int:
        return self.r_band.shape[1]

    @property
    def r(self) -> CsrMatrix:
        n = self.n
        offsets = [k for k in (0, 1, 2) if k < n]
        diagonals = [self.r_band[2 - k, k:] for k in offsets]
        return CsrMatrix(sp.diags_array(diagonals, offsets=offsets, shape=(n, n)))

    def apply_qt(self, x: np.ndarray) -> np.ndarray:
        y = _check_vector(x, self.n, "apply_qt").copy()
        for k, (c, s) in enumerate(zip(self.cosines, self.sines)):
            a, b = y[k], y[k + 1]
            y[k], y[k + 1] = c * a + s * b, -s * a + c * b
        y[-1] *= self.last_sign
        return y

    def apply_q(self, x: np.ndarray) -> np.ndarray:
        y = _check_vector(x, self.n, "apply_q").copy()
        y[-1] *= self.last_sign
        for k in range(self.n - 2, -1, -1):
            c, s = self.cosines[k], self.sines[k]
            a, b = y[k], y[k + 1]
            y[k], y[k + 1] = c * a - s * b, s * a + c * b
        return y

    def r_solve(self, b: np.ndarray) -> np.ndarray:
        b = _check_vector(b, self.n, "r_solve")
        return sla.solve_banded((0, 2), self.r_band, b)

    def r_solve_transpose(self, b: np.ndarray) -> np.ndarray:
        b = _check_vector(b, self.n, "r_solve_transpose")
        # R^T is lower triangular; (2, 0) storage is the upper layout flipped top to bottom
        lower = np.zeros_like(self.r_band)
        lower[0, :] = self.r_band[2, :]
        lower[1, :-1] = self.r_band[1, 1:]
        lower[2, :-2] = self.r_band[0, 2:]
        return sla.solve_banded((2, 0), lower, b)

    def r_matvec(self, x: np.ndarray) -> np.ndarray:
        return self.r.matvec(x)

    def r_rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.r.rmatvec(x)


@dataclass(frozen=True)
class RqFactor:
    """A = R Q with R upper triangular and nonnegative diagonal."""

    r: np.ndarray
    q: np.ndarray

    @property
    def n(self) -> int:
        return self.r.shape[0]


@dataclass(frozen=True)
class PolarFactor:
    """A = Q H with Q orthogonal and H = (A^T A)^{1/2} symmetric positive definite."""

    q: np.ndarray
    h: np.ndarray
    iterations: int
    defect: float

    @property
    def n(self) -> int:
        return self.h.shape[0]


@singledispatch
def qr(a) -> QrFactor | BandedQrFactor:
    """
    QR factorization with nonnegative R diagonal.

    Dense input uses Householder reflections (LAPACK geqrf); a Tridiagonal uses
    Givens rotations and returns R in band storage.
    """
    raise TypeError(f"qr does not support {type(a).__name__}")


@qr.register(np.ndarray)
@qr.register(DenseMatrix)
def _qr_dense(a) -> QrFactor:
    arr = _dense(a)
    q, r = sla.qr(arr)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    r = signs[:, None] * r
    q = q * signs[None, :]
    _check_rank(np.diag(r), float(np.linalg.norm(arr, ord=np.inf)))
    return QrFactor(q=q, r=r)


@qr.register(Tridiagonal)
def _qr_tridiagonal(t: Tridiagonal) -> BandedQrFactor:
    n = t.n
    r_band = np.zeros((3, n))
    cosines = np.empty(max(n - 1, 0))
    sines = np.empty(max(n - 1, 0))

    cur_d = t.diag[0]
    cur_u = t.sup[0] if n > 1 else 0.0
    for k in range(n - 1):
        a, b = cur_d, t.sub[k]
        rho = np.hypot(a, b)
        c, s = (1.0, 0.0) if rho == 0.0 else (a / rho, b / rho)
        cosines[k], sines[k] = c, s
        next_d = t.diag[k + 1]
        next_u = t.sup[k + 1] if k + 1 < n - 1 else 0.0
        r_band[2, k] = rho
        r_band[1, k + 1] = c * cur_u + s * next_d
        if k + 2 < n:
            r_band[0, k + 2] = s * next_u
        cur_d = -s * cur_u + c * next_d
        cur_u = c * next_u

    last_sign = -1.0 if cur_d < 0 else 1.0
    r_band[2, n - 1] = last_sign * cur_d
    _check_rank(r_band[2, :], t.norm_inf())
    logger.debug(f"Givens QR of tridiagonal matrix: n={n}")
    return BandedQrFactor(r_band=r_band, cosines=cosines, sines=sines, last_sign=last_sign)


def rq(a: DenseMatrix | np.ndarray) -> RqFactor:
    """
    RQ factorization A = R Q with nonnegative R diagonal.

    Computed from the QR factorization of the row-reversed transpose: with J the
    exchange matrix, (J A)^T = Q' R' gives A = (J R'^T J)(J Q'^T).
    """
    arr = _dense(a)
    f = _qr_dense(arr[::-1, :].T)
    r = f.r.T[::-1, ::-1]
    q = f.q.T[::-1, :]
    return RqFactor(r=np.ascontiguousarray(r), q=np.ascontiguousarray(q))


def _orthogonality_defect(x: np.ndarray) -> float:
    n = x.shape[0]
    return float(np.linalg.norm(x.T @ x - np.eye(n)) / np.sqrt(n))


def polar(a: DenseMatrix | np.ndarray, *, tol: float = POLAR_TOL, max_iter: int = POLAR_MAX_ITER) -> PolarFactor:
    """
    Polar decomposition A = Q H by the Newton iteration X <- (X + X^{-T}) / 2.

    Frobenius-norm scaling is used while the iterate is far from orthogonal and
    switched off once the update is small, keeping quadratic convergence at the end.
    The orthogonality defect is ||X^T X - I||_F / sqrt(n).

    Raises:
        ConvergenceError: if the defect is not below ``tol`` after ``max_iter`` steps
    """
    arr = _dense(a)
    n = arr.shape[0]
    x = arr.copy()
    defect = _orthogonality_defect(x)
    scaling = True
    it = 0
    while defect >= tol and it < max_iter:
        try:
            x_inv_t = np.linalg.inv(x).T
        except np.linalg.LinAlgError as e:
            raise ConvergenceError("polar: iterate became singular", defect) from e
        if scaling:
            gamma = np.sqrt(np.linalg.norm(x_inv_t) / np.linalg.norm(x))
            x_new = 0.5 * (gamma * x + x_inv_t / gamma)
        else:
            x_new = 0.5 * (x + x_inv_t)
        step = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), NORM_FLOOR)
        if step < 1e-2:
            scaling = False
        x = x_new
        it += 1
        defect = _orthogonality_defect(x)
        logger.debug(f"polar iteration {it}: defect={defect:.3e}")

    if defect >= tol:
        raise ConvergenceError(f"polar: no convergence in {max_iter} iterations", defect)

    h = x.T @ arr
    h = 0.5 * (h + h.T)
    return PolarFactor(q=x, h=h, iterations=it, defect=defect)


def sym_eig(s: DenseMatrix | np.ndarray) -> np.ndarray:
    """
    Eigenvalues of a symmetric matrix in ascending order.

    Raises:
        AsymmetryError: if the relative asymmetry exceeds 1e-12
    """
    arr = _dense(s)
    scale = max(float(np.abs(arr).max(initial=0.0)), NORM_FLOOR)
    defect = float(np.abs(arr - arr.T).max(initial=0.0)) / scale
    if defect > SYMMETRY_TOL:
        raise AsymmetryError(defect, SYMMETRY_TOL)
    return sla.eigh(0.5 * (arr + arr.T), eigvals_only=True)
