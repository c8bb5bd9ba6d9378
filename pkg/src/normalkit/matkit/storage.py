"""Dense, CSR and tridiagonal matrix storage.

All three types are immutable after construction. ``CsrMatrix`` keeps its
indices in canonical form (sorted within each row, no duplicates) and wraps a
``scipy.sparse.csr_array`` for the heavy lifting.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import DimensionError

logger = logging.getLogger(__name__)

# Absolute floor used wherever a tolerance is scaled by a norm
NORM_FLOOR = 1e-300


def _check_vector(x: np.ndarray, n: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n:
        raise DimensionError(f"{what}: expected vector of length {n}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major dense matrix with finite entries."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, order="C")
        if arr.ndim != 2:
            raise DimensionError(f"DenseMatrix needs a 2-D array, got {arr.ndim}-D")
        if not np.all(np.isfinite(arr)):
            raise ValueError("DenseMatrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls(np.eye(n))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def T(self) -> "DenseMatrix":
        return DenseMatrix(self.values.T)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.values @ _check_vector(x, self.cols, "DenseMatrix.matvec")

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.values.T @ _check_vector(x, self.rows, "DenseMatrix.rmatvec")

    def toarray(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix in canonical form."""

    matrix: sp.csr_array

    def __post_init__(self):
        m = sp.csr_array(self.matrix, dtype=float, copy=True)
        m.sum_duplicates()
        m.sort_indices()
        if not np.all(np.isfinite(m.data)):
            raise ValueError("CsrMatrix values must be finite")
        object.__setattr__(self, "matrix", m)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_scipy(cls, m) -> "CsrMatrix":
        return cls(sp.csr_array(m))

    @classmethod
    def from_dense(cls, a: np.ndarray | DenseMatrix) -> "CsrMatrix":
        arr = a.values if isinstance(a, DenseMatrix) else np.asarray(a, dtype=float)
        return cls(sp.csr_array(arr))

    @classmethod
    def identity(cls, n: int) -> "CsrMatrix":
        return cls(sp.identity(n, format="csr"))

    @classmethod
    def from_arrays(
        cls, indptr: np.ndarray, indices: np.ndarray, data: np.ndarray, shape: tuple[int, int]
    ) -> "CsrMatrix":
        """Build from raw CSR arrays, rejecting non-canonical input instead of repairing it."""
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=float)
        rows, cols = shape
        if indptr.shape != (rows + 1,) or indptr[0] != 0:
            raise DimensionError(f"row pointers must have length {rows + 1} and start at 0")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("row pointers must be nondecreasing")
        if indptr[-1] != indices.shape[0] or indices.shape != data.shape:
            raise DimensionError("last row pointer must equal nnz and match index/value lengths")
        if indices.size and (indices.min() < 0 or indices.max() >= cols):
            raise DimensionError("column index out of bounds")
        for i in range(rows):
            row = indices[indptr[i] : indptr[i + 1]]
            if np.any(np.diff(row) <= 0):
                raise ValueError(f"column indices of row {i} are not strictly increasing")
        return cls(sp.csr_array((data, indices, indptr), shape=shape))

    # -- structure --------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @property
    def indptr(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def data(self) -> np.ndarray:
        return self.matrix.data

    @cached_property
    def _row_of_entry(self) -> np.ndarray:
        return np.repeat(np.arange(self.rows), np.diff(self.indptr))

    @cached_property
    def lower_bandwidth(self) -> int:
        diff = self._row_of_entry - self.indices
        return int(max(diff.max(initial=0), 0))

    @cached_property
    def upper_bandwidth(self) -> int:
        diff = self.indices - self._row_of_entry
        return int(max(diff.max(initial=0), 0))

    def norm_max(self) -> float:
        return float(np.abs(self.data).max(initial=0.0))

    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.data))

    def symmetry_defect(self) -> float:
        """Relative max-norm of A - A^T."""
        if self.rows != self.cols:
            return np.inf
        diff = self.matrix - self.matrix.T
        defect = float(np.abs(diff.data).max(initial=0.0)) if diff.nnz else 0.0
        return defect / max(self.norm_max(), NORM_FLOOR)

    # -- arithmetic -------------------------------------------------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ _check_vector(x, self.cols, "CsrMatrix.matvec")

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix.T @ _check_vector(x, self.rows, "CsrMatrix.rmatvec")

    def transpose(self) -> "CsrMatrix":
        return CsrMatrix(self.matrix.T.tocsr())

    @property
    def T(self) -> "CsrMatrix":
        return self.transpose()

    def __matmul__(self, other):
        if isinstance(other, CsrMatrix):
            if self.cols != other.rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            return CsrMatrix(self.matrix @ other.matrix)
        return self.matvec(other)

    def __add__(self, other: "CsrMatrix") -> "CsrMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return CsrMatrix(self.matrix + other.matrix)

    def scaled(self, c: float) -> "CsrMatrix":
        return CsrMatrix(self.matrix * c)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def to_scipy(self) -> sp.csr_array:
        return self.matrix

    # -- band storage -----------------------------------------------------

    def to_banded(self, kl: int, ku: int, extra_rows: int = 0) -> np.ndarray:
        """LAPACK general band storage: ab[extra_rows + ku + i - j, j] = a[i, j]."""
        if self.lower_bandwidth > kl or self.upper_bandwidth > ku:
            raise DimensionError(
                f"matrix bandwidth ({self.lower_bandwidth}, {self.upper_bandwidth}) exceeds ({kl}, {ku})"
            )
        ab = np.zeros((extra_rows + kl + ku + 1, self.cols))
        ab[extra_rows + ku + self._row_of_entry - self.indices, self.indices] = self.data
        return ab

    def to_lower_banded(self, kl: int) -> np.ndarray:
        """Symmetric lower band storage: ab[i - j, j] = a[i, j] for i >= j."""
        rows, cols = self._row_of_entry, self.indices
        keep = rows >= cols
        if np.any(rows[keep] - cols[keep] > kl):
            raise DimensionError(f"lower bandwidth exceeds {kl}")
        ab = np.zeros((kl + 1, self.cols))
        ab[rows[keep] - cols[keep], cols[keep]] = self.data[keep]
        return ab


@dataclass(frozen=True)
class Tridiagonal:
    """Three-band matrix with sub, main and super diagonals."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub, diag, sup = (np.array(v, dtype=float) for v in (self.sub, self.diag, self.sup))
        n = diag.shape[0]
        if diag.ndim != 1 or n < 1:
            raise DimensionError("Tridiagonal needs a nonempty main diagonal")
        if sub.shape != (n - 1,) or sup.shape != (n - 1,):
            raise DimensionError(f"off-diagonals must have length {n - 1}, got {sub.shape} and {sup.shape}")
        if not (np.all(np.isfinite(sub)) and np.all(np.isfinite(diag)) and np.all(np.isfinite(sup))):
            raise ValueError("Tridiagonal entries must be finite")
        for name, arr in (("sub", sub), ("diag", diag), ("sup", sup)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def constant(cls, n: int, lower: float, main: float, upper: float) -> "Tridiagonal":
        return cls(np.full(n - 1, lower), np.full(n, main), np.full(n - 1, upper))

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def is_lower_bidiagonal(self) -> bool:
        return not np.any(self.sup)

    def norm_inf(self) -> float:
        rows = np.abs(self.diag).copy()
        rows[1:] += np.abs(self.sub)
        rows[:-1] += np.abs(self.sup)
        return float(rows.max())

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = _check_vector(x, self.n, "Tridiagonal.matvec")
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.transpose().matvec(x)

    def transpose(self) -> "Tridiagonal":
        return Tridiagonal(self.sup, self.diag, self.sub)

    @property
    def T(self) -> "Tridiagonal":
        return self.transpose()

    def scaled(self, c: float) -> "Tridiagonal":
        return Tridiagonal(c * self.sub, c * self.diag, c * self.sup)

    def to_banded(self) -> np.ndarray:
        """(1, 1) band storage as consumed by ``scipy.linalg.solve_banded``."""
        ab = np.zeros((3, self.n))
        ab[0, 1:] = self.sup
        ab[1, :] = self.diag
        ab[2, :-1] = self.sub
        return ab

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Banded LU solve with partial pivoting (LAPACK)."""
        b = _check_vector(b, self.n, "Tridiagonal.solve")
        if self.is_lower_bidiagonal:
            ab = np.vstack([self.diag, np.append(self.sub, 0.0)])
            return sla.solve_banded((1, 0), ab, b)
        return sla.solve_banded((1, 1), self.to_banded(), b)

    def solve_transpose(self, b: np.ndarray) -> np.ndarray:
        return self.transpose().solve(b)

    def to_csr(self) -> CsrMatrix:
        n = self.n
        if n == 1:
            return CsrMatrix(sp.csr_array(self.diag.reshape(1, 1)))
        return CsrMatrix(sp.diags_array([self.sub, self.diag, self.sup], offsets=[-1, 0, 1], shape=(n, n)))

    def toarray(self) -> np.ndarray:
        return self.to_csr().toarray()


Matrix = DenseMatrix | CsrMatrix | Tridiagonal


def as_array(a: "Matrix | np.ndarray") -> np.ndarray:
    """Dense copy of any supported matrix."""
    if isinstance(a, np.ndarray):
        return np.array(a, dtype=float)
    return a.toarray()


def spmv(a: Matrix, x: np.ndarray) -> np.ndarray:
    """y = A x."""
    return a.matvec(x)


def spmv_t(a: Matrix, x: np.ndarray) -> np.ndarray:
    """y = A^T x."""
    return a.rmatvec(x)
