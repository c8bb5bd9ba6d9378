"""Riesz maps T for the weighted normal equations A^T T A x = A^T T b."""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ConfigError
from ..matkit import CholeskyFactor, CsrMatrix, cholesky
from .assembly import assemble_mass, assemble_stiffness
from .mesh import StructuredMesh

logger = logging.getLogger(__name__)


class RieszVariant(str, Enum):
    IDENTITY = "identity"
    L2 = "l2"  # T = M^{-1}
    H1 = "h1"  # T = nu^{-1} K^{-1}


@dataclass(frozen=True)
class RieszMap:
    """
    T and T^{-1} for one of the supported inner products.

    T itself is dense; only T^{-1} (M or nu K) is assembled and T is applied
    through its Cholesky factor.
    """

    variant: RieszVariant
    gram: CsrMatrix | None = None
    factor: CholeskyFactor | None = None
    scale: float = 1.0

    def apply(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.factor is None:
            return r.copy()
        return self.factor.solve(r) / self.scale

    def apply_inverse(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.gram is None:
            return r.copy()
        return self.scale * self.gram.matvec(r)

    def to_dense(self) -> np.ndarray:
        """T as a dense matrix (small meshes only)."""
        if self.gram is None:
            raise ConfigError("identity Riesz map has no mesh size; use numpy.eye")
        return np.linalg.inv(self.scale * self.gram.toarray())


def riesz(mesh: StructuredMesh, variant: RieszVariant | str, nu: float = 1.0) -> RieszMap:
    """
    Build T for ``variant``.

    L2: T = M^{-1}, T^{-1} = M. H1: T = nu^{-1} K^{-1}, T^{-1} = nu K.
    """
    variant = RieszVariant(variant)
    if variant is RieszVariant.IDENTITY:
        return RieszMap(variant)
    if variant is RieszVariant.L2:
        gram = assemble_mass(mesh)
        scale = 1.0
    else:
        if not nu > 0:
            raise ConfigError(f"H1 Riesz map needs nu > 0, got {nu}")
        gram = assemble_stiffness(mesh)
        scale = nu
    logger.debug(f"Riesz map {variant.value}: n={gram.rows}, scale={scale:g}")
    return RieszMap(variant, gram, cholesky(gram), scale)
