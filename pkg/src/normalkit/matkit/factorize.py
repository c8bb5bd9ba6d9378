"""Elimination-based factorizations: Thomas, banded Cholesky and banded LU."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg.lapack import get_lapack_funcs

from ..errors import (
    AsymmetryError,
    DimensionError,
    NotPositiveDefiniteError,
    PivotBreakdownError,
    SingularMatrixError,
)
from .storage import NORM_FLOOR, CsrMatrix, Tridiagonal, _check_vector

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-14
SYMMETRY_TOL = 1e-12


def thomas_solve(t: Tridiagonal, b: np.ndarray) -> np.ndarray:
    """
    Solve T x = b by Gaussian elimination without pivoting.

    Raises:
        PivotBreakdownError: if a pivot falls below 1e-14 * ||T||_inf.
    """
    n = t.n
    b = _check_vector(b, n, "thomas_solve")
    threshold = PIVOT_TOL * max(t.norm_inf(), NORM_FLOOR)

    c = np.empty(n)
    d = np.empty(n)
    pivot = t.diag[0]
    if abs(pivot) <= threshold:
        raise PivotBreakdownError(0, pivot)
    c[0] = t.sup[0] / pivot if n > 1 else 0.0
    d[0] = b[0] / pivot
    for i in range(1, n):
        pivot = t.diag[i] - t.sub[i - 1] * c[i - 1]
        if abs(pivot) <= threshold:
            raise PivotBreakdownError(i, pivot)
        c[i] = t.sup[i] / pivot if i < n - 1 else 0.0
        d[i] = (b[i] - t.sub[i - 1] * d[i - 1]) / pivot

    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


@dataclass(frozen=True)
class CholeskyFactor:
    """A = L L^T with L held in lower band storage (band[k, j] = L[j + k, j])."""

    band: np.ndarray
    n: int

    @property
    def bandwidth(self) -> int:
        return self.band.shape[0] - 1

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = _check_vector(b, self.n, "CholeskyFactor.solve")
        return sla.cho_solve_banded((self.band, True), b)

    def solve_many(self, b: np.ndarray) -> np.ndarray:
        """Solve for every column of ``b``."""
        b = np.asarray(b, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.n:
            raise DimensionError(f"CholeskyFactor.solve_many: expected ({self.n}, k), got {b.shape}")
        return sla.cho_solve_banded((self.band, True), b)

    def lower(self) -> CsrMatrix:
        diagonals = [self.band[k, : self.n - k] for k in range(self.bandwidth + 1)]
        offsets = [-k for k in range(self.bandwidth + 1)]
        return CsrMatrix(sp.diags_array(diagonals, offsets=offsets, shape=(self.n, self.n)))

    def lower_matvec(self, x: np.ndarray) -> np.ndarray:
        return self.lower().matvec(x)


def cholesky(a: CsrMatrix, *, check_symmetry: bool = True) -> CholeskyFactor:
    """
    Banded Cholesky factorization of a symmetric positive definite matrix.

    The bandwidth is read off the sparsity pattern; no reordering is applied.

    Args:
        a: Symmetric positive definite matrix
        check_symmetry: Reject matrices whose relative asymmetry exceeds 1e-12

    Returns:
        CholeskyFactor holding L in band storage

    Raises:
        AsymmetryError: if ``a`` is not symmetric
        NotPositiveDefiniteError: naming the first nonpositive leading minor
    """
    if a.rows != a.cols:
        raise DimensionError(f"cholesky needs a square matrix, got {a.shape}")
    if check_symmetry:
        defect = a.symmetry_defect()
        if defect > SYMMETRY_TOL:
            raise AsymmetryError(defect, SYMMETRY_TOL)

    kl = a.lower_bandwidth
    ab = a.to_lower_banded(kl)
    logger.debug(f"Banded Cholesky: n={a.rows}, bandwidth={kl}")
    (pbtrf,) = get_lapack_funcs(("pbtrf",), (ab,))
    band, info = pbtrf(ab, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(int(info))
    if info < 0:
        raise ValueError(f"illegal argument {-info} to pbtrf")
    return CholeskyFactor(band=band, n=a.rows)


def cholesky_solve(factor: CholeskyFactor, b: np.ndarray) -> np.ndarray:
    """Solve A x = b from a Cholesky factor."""
    return factor.solve(b)


@dataclass(frozen=True)
class BandedLuFactor:
    """P A = L U with partial pivoting inside the band (LAPACK gbtrf layout)."""

    lu: np.ndarray
    pivots: np.ndarray
    kl: int
    ku: int
    n: int

    def solve(self, b: np.ndarray, *, transpose: bool = False) -> np.ndarray:
        b = _check_vector(b, self.n, "BandedLuFactor.solve")
        (gbtrs,) = get_lapack_funcs(("gbtrs",), (self.lu,))
        x, info = gbtrs(self.lu, self.kl, self.ku, b, self.pivots, trans=1 if transpose else 0)
        if info != 0:
            raise ValueError(f"illegal argument {-info} to gbtrs")
        return x

    def upper(self) -> np.ndarray:
        """Dense U (bandwidth kl + ku after pivoting)."""
        u = np.zeros((self.n, self.n))
        width = self.kl + self.ku
        for k in range(width + 1):
            row = self.lu[width - k, k:]
            u[np.arange(self.n - k), np.arange(k, self.n)] = row
        return u

    def multipliers(self) -> np.ndarray:
        """Elimination multipliers of L, stored below the U band."""
        return self.lu[self.kl + self.ku + 1 :, :]


def banded_lu(a: CsrMatrix) -> BandedLuFactor:
    """
    Banded LU factorization with partial pivoting.

    Raises:
        SingularMatrixError: if a pivot is zero or below 1e-14 * ||A||_max
    """
    if a.rows != a.cols:
        raise DimensionError(f"banded_lu needs a square matrix, got {a.shape}")
    kl, ku = a.lower_bandwidth, a.upper_bandwidth
    ab = a.to_banded(kl, ku, extra_rows=kl)
    logger.debug(f"Banded LU: n={a.rows}, kl={kl}, ku={ku}")
    (gbtrf,) = get_lapack_funcs(("gbtrf",), (ab,))
    lu, piv, info = gbtrf(ab, kl, ku)
    if info > 0:
        raise SingularMatrixError(f"U[{info - 1},{info - 1}] is exactly zero")
    if info < 0:
        raise ValueError(f"illegal argument {-info} to gbtrf")
    diag = np.abs(lu[kl + ku, :])
    threshold = PIVOT_TOL * max(a.norm_max(), NORM_FLOOR)
    if diag.min() <= threshold:
        idx = int(diag.argmin())
        raise SingularMatrixError(f"|U[{idx},{idx}]| = {diag[idx]:.3e} is below {threshold:.3e}")
    return BandedLuFactor(lu=lu, pivots=piv, kl=kl, ku=ku, n=a.rows)


def lu_solve(factor: BandedLuFactor, b: np.ndarray) -> np.ndarray:
    """Solve A x = b from a banded LU factor."""
    return factor.solve(b)
