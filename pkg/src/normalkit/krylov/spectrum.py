"""T-singular values of A P^{-1} and the CG convergence bound they imply."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..errors import DimensionError, FactorizationError
from ..matkit import CsrMatrix, DenseMatrix, Tridiagonal, as_array, sym_eig

logger = logging.getLogger(__name__)

DenseLike = np.ndarray | DenseMatrix | CsrMatrix | Tridiagonal


@dataclass(frozen=True)
class TSingularSpectrum:
    """Ascending T-singular values of A P^{-1} and their ratio."""

    sigma: np.ndarray

    @property
    def kappa_t(self) -> float:
        smin, smax = float(self.sigma[0]), float(self.sigma[-1])
        return np.inf if smin == 0.0 else smax / smin


def _dense_weight(t) -> np.ndarray | None:
    if t is None:
        return None
    if hasattr(t, "to_dense"):
        return t.to_dense()
    if isinstance(t, (np.ndarray, DenseMatrix, CsrMatrix, Tridiagonal)):
        return as_array(t)
    raise TypeError(f"cannot densify weight {type(t).__name__}")


def t_singular_values(a: DenseLike, p: DenseLike | None = None, t=None) -> TSingularSpectrum:
    """
    T-singular values of A P^{-1}.

    With T = C^T C (Cholesky), these are the singular values of C (A P^{-1}) C^{-1};
    their squares are the eigenvalues of (P^T T P)^{-1} A^T T A.

    Args:
        a: Square A (dense-representable)
        p: Preconditioner P (identity when omitted)
        t: SPD weight as a matrix, an object with ``to_dense()``, or None for identity
    """
    a_d = as_array(a)
    n = a_d.shape[0]
    if a_d.shape != (n, n):
        raise DimensionError(f"A must be square, got {a_d.shape}")
    x = a_d if p is None else sla.solve(as_array(p).T, a_d.T).T
    t_d = _dense_weight(t)
    if t_d is None:
        y = x
    else:
        c = sla.cholesky(t_d, lower=False)
        y = sla.solve_triangular(c, (c @ x).T, trans="T", lower=False).T
    lam = sym_eig(y.T @ y)
    if lam[0] < -1e-10 * max(abs(lam[-1]), 1e-300):
        raise FactorizationError(f"T-Gram matrix is indefinite (min eigenvalue {lam[0]:.3e})")
    sigma = np.sqrt(np.clip(lam, 0.0, None))
    logger.debug(f"T-singular values: n={n}, min={sigma[0]:.3e}, max={sigma[-1]:.3e}")
    return TSingularSpectrum(sigma=sigma)


def normal_spectrum(a: DenseLike, p: DenseLike | None = None) -> np.ndarray:
    """Eigenvalues of (A P^{-1})^T (A P^{-1}), equal to those of (P^T P)^{-1} A^T A."""
    return t_singular_values(a, p).sigma ** 2


def cg_bound(spectrum: TSingularSpectrum, k: int) -> float:
    """2 ((kappa_T - 1) / (kappa_T + 1))^k."""
    kappa = spectrum.kappa_t
    if not np.isfinite(kappa):
        return 2.0
    return 2.0 * ((kappa - 1.0) / (kappa + 1.0)) ** k


def matrix_squaring_example(c: float = 10.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    A 2x2 system where P^{-1} A has the single eigenvalue 1 yet P^T P is a poor normal preconditioner.

    A = [[1, c], [0, 1]], P = I, b = e_1: GMRES finishes in one step (b is an
    eigenvector) while CGNE needs two.
    """
    a = np.array([[1.0, c], [0.0, 1.0]])
    return a, np.eye(2), np.array([1.0, 0.0])
