"""Matrix storage and factorizations."""

from .factorize import (
    BandedLuFactor,
    CholeskyFactor,
    banded_lu,
    cholesky,
    cholesky_solve,
    lu_solve,
    thomas_solve,
)
from .mmio import read_matrix_market, write_matrix_market
from .orthogonal import (
    BandedQrFactor,
    PolarFactor,
    QrFactor,
    RqFactor,
    polar,
    qr,
    rq,
    sym_eig,
)
from .storage import CsrMatrix, DenseMatrix, Matrix, Tridiagonal, as_array, spmv, spmv_t

__all__ = [
    # Storage
    "DenseMatrix",
    "CsrMatrix",
    "Tridiagonal",
    "Matrix",
    "as_array",
    "spmv",
    "spmv_t",
    # Elimination
    "thomas_solve",
    "CholeskyFactor",
    "cholesky",
    "cholesky_solve",
    "BandedLuFactor",
    "banded_lu",
    "lu_solve",
    # Orthogonal
    "QrFactor",
    "BandedQrFactor",
    "RqFactor",
    "PolarFactor",
    "qr",
    "rq",
    "polar",
    "sym_eig",
    # Exchange
    "read_matrix_market",
    "write_matrix_market",
]
