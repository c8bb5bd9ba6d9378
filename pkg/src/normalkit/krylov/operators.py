"""Linear operators built on ``scipy.sparse.linalg.LinearOperator``.

scipy's operator already composes (``A @ B``, ``A + B``, ``c * A``, ``A.T``);
this module adapts normalkit matrices to it and builds the weighted normal
operator A^T T A without forming it.
"""

import logging
from typing import Any

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from ..errors import DimensionError, RieszApplicationError
from ..matkit import CsrMatrix, DenseMatrix, Tridiagonal
from ..protocols import WeightOperator

logger = logging.getLogger(__name__)

OperatorLike = LinearOperator | CsrMatrix | DenseMatrix | Tridiagonal | np.ndarray | Any


def as_operator(a: OperatorLike) -> LinearOperator:
    """Wrap any supported matrix (or scipy operand) as a LinearOperator."""
    if isinstance(a, LinearOperator):
        return a
    if isinstance(a, (CsrMatrix, Tridiagonal, DenseMatrix)):
        n, m = a.shape
        return LinearOperator(
            (n, m),
            matvec=lambda x: a.matvec(np.ravel(x)),
            rmatvec=lambda x: a.rmatvec(np.ravel(x)),
            dtype=float,
        )
    return aslinearoperator(a)


def product(*ops: OperatorLike) -> LinearOperator:
    """Composition ops[0] @ ops[1] @ ..."""
    result = as_operator(ops[0])
    for op in ops[1:]:
        nxt = as_operator(op)
        if result.shape[1] != nxt.shape[0]:
            raise DimensionError(f"cannot compose {result.shape} with {nxt.shape}")
        result = result @ nxt
    return result


def weight_operator(t: WeightOperator, n: int) -> LinearOperator:
    """Symmetric operator r -> T r; failures surface as RieszApplicationError."""

    def apply(r: np.ndarray) -> np.ndarray:
        try:
            return t.apply(np.asarray(r).ravel())
        except RieszApplicationError:
            raise
        except Exception as e:
            raise RieszApplicationError(f"applying the Riesz weight failed: {e}") from e

    return LinearOperator((n, n), matvec=apply, rmatvec=apply, dtype=float)


def normal_operator(a: OperatorLike, t: WeightOperator | None = None) -> LinearOperator:
    """B_T = A^T T A (T = identity when omitted)."""
    op = as_operator(a)
    if op.shape[0] != op.shape[1]:
        raise DimensionError(f"normal_operator needs a square A, got {op.shape}")
    if t is None:
        return op.T @ op
    return op.T @ weight_operator(t, op.shape[0]) @ op


def adjoint_defect(op: OperatorLike, rng: np.random.Generator, probes: int = 8) -> float:
    """Largest relative |<Ax, y> - <x, A^T y>| over random probe pairs."""
    a = as_operator(op)
    worst = 0.0
    for _ in range(probes):
        x = rng.standard_normal(a.shape[1])
        y = rng.standard_normal(a.shape[0])
        ax, aty = a.matvec(x), a.rmatvec(y)
        lhs, rhs = float(ax @ y), float(x @ aty)
        scale = max(np.linalg.norm(ax) * np.linalg.norm(y), np.linalg.norm(x) * np.linalg.norm(aty), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
