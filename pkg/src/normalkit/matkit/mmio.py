"""Matrix Market exchange for CsrMatrix (coordinate format, real, general or symmetric)."""

import logging
from pathlib import Path

import scipy.io
import scipy.sparse as sp

from ..errors import DimensionError
from .storage import CsrMatrix, Tridiagonal

logger = logging.getLogger(__name__)

HEADER = "%%MatrixMarket matrix coordinate real general"


def read_matrix_market(path: str | Path) -> CsrMatrix:
    """Read a coordinate Matrix Market file; symmetric storage is expanded."""
    path = Path(path)
    m = scipy.io.mmread(str(path))
    if not sp.issparse(m):
        raise DimensionError(f"{path} holds a dense array, expected coordinate format")
    logger.info(f"Read {m.shape[0]}x{m.shape[1]} matrix with {m.nnz} entries from {path}")
    return CsrMatrix.from_scipy(m)


def write_matrix_market(path: str | Path, a: CsrMatrix | Tridiagonal, comment: str = "") -> Path:
    """Write ``a`` with a general (non-symmetric) coordinate header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    csr = a.to_csr() if isinstance(a, Tridiagonal) else a
    scipy.io.mmwrite(str(path), sp.coo_matrix(csr.to_scipy()), comment=comment, field="real", symmetry="general")
    logger.info(f"Wrote {csr.rows}x{csr.cols} matrix with {csr.nnz} entries to {path}")
    return path
