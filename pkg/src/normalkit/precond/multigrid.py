"""Geometric multigrid V-cycle on the structured unit-square triangulation.

Interior nodes (i, j), 1 <= i, j <= m - 1, are numbered x-fastest and every
cell is split along its south-west / north-east diagonal. Prolongation is P1
interpolation between nested meshes, restriction its transpose, and coarse
operators are Galerkin products.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from ..errors import ConfigError, MeshError
from ..matkit import CholeskyFactor, CsrMatrix, cholesky
from .handles import PreconditionerHandle, Symmetry

logger = logging.getLogger(__name__)

COARSEST_CELLS = 4


@dataclass(frozen=True)
class GridDescriptor:
    """Square grid with ``m`` cells per side and Dirichlet boundary eliminated."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise MeshError(f"grid needs at least 2 cells per side, got {self.m}")

    @property
    def side(self) -> int:
        return self.m - 1

    @property
    def n_interior(self) -> int:
        return self.side * self.side

    def index(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Unknown number of interior node (i, j)."""
        return (j - 1) * self.side + (i - 1)

    def coarsened(self) -> "GridDescriptor":
        if self.m % 2:
            raise MeshError(f"cannot halve a grid with {self.m} cells per side")
        return GridDescriptor(self.m // 2)


def default_levels(m: int) -> int:
    """Levels down to a 4x4-cell coarsest grid."""
    levels = 1
    while m % 2 == 0 and m // 2 >= COARSEST_CELLS:
        m //= 2
        levels += 1
    return levels


def prolongation(fine: GridDescriptor) -> sp.csr_array:
    """P1 interpolation from the once-coarsened grid to ``fine``."""
    coarse = fine.coarsened()
    idx = np.arange(1, fine.m)
    i, j = (a.ravel() for a in np.meshgrid(idx, idx, indexing="xy"))
    rows = fine.index(i, j)
    # midpoints of horizontal, vertical and diagonal edges take the mean of both ends
    lo_i, lo_j = i // 2, j // 2
    hi_i, hi_j = (i + 1) // 2, (j + 1) // 2
    coincident = (lo_i == hi_i) & (lo_j == hi_j)

    def interior(ci, cj):
        return (ci >= 1) & (ci <= coarse.side) & (cj >= 1) & (cj <= coarse.side)

    lo = interior(lo_i, lo_j)
    hi = interior(hi_i, hi_j) & ~coincident
    weights = np.where(coincident, 1.0, 0.5)
    return sp.csr_array(
        (
            np.concatenate([weights[lo], np.full(hi.sum(), 0.5)]),
            (
                np.concatenate([rows[lo], rows[hi]]),
                np.concatenate([coarse.index(lo_i[lo], lo_j[lo]), coarse.index(hi_i[hi], hi_j[hi])]),
            ),
        ),
        shape=(fine.n_interior, coarse.n_interior),
    )


def _int32_indices(m: sp.csr_array) -> sp.csr_array:
    # spsolve_triangular (SciPy >= 1.15, SuperLU backend) requires int32 index arrays.
    m.indices = m.indices.astype(np.int32, copy=False)
    m.indptr = m.indptr.astype(np.int32, copy=False)
    return m


@dataclass(frozen=True)
class SorSmoother:
    """Forward sweeps solve with D/omega + L, backward sweeps with D/omega + U."""

    operator: sp.csr_array
    lower: sp.csr_array
    upper: sp.csr_array

    @classmethod
    def build(cls, a: sp.csr_array, omega: float) -> "SorSmoother":
        d = sp.diags_array(a.diagonal() / omega)
        return cls(
            operator=a,
            lower=_int32_indices(sp.csr_array(sp.tril(a, k=-1) + d)),
            upper=_int32_indices(sp.csr_array(sp.triu(a, k=1) + d)),
        )

    def forward(self, x: np.ndarray, b: np.ndarray, sweeps: int) -> np.ndarray:
        for _ in range(sweeps):
            x = x + spsolve_triangular(self.lower, b - self.operator @ x, lower=True)
        return x

    def backward(self, x: np.ndarray, b: np.ndarray, sweeps: int) -> np.ndarray:
        for _ in range(sweeps):
            x = x + spsolve_triangular(self.upper, b - self.operator @ x, lower=False)
        return x


@dataclass(frozen=True)
class GmgLevel:
    grid: GridDescriptor
    operator: CsrMatrix
    prolongation: CsrMatrix | None
    smoother: SorSmoother | None
    sor_omega: float
    pre_smooth: int
    post_smooth: int


@dataclass(frozen=True)
class GmgHierarchy:
    """Levels ordered fine to coarse; the last one is solved by ``coarsest``."""

    levels: list[GmgLevel]
    coarsest: CholeskyFactor

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def symmetric(self) -> bool:
        return all(lv.pre_smooth == lv.post_smooth for lv in self.levels[:-1])

    def vcycle(self, b: np.ndarray, level: int = 0) -> np.ndarray:
        """One V-cycle from a zero initial guess on ``level``."""
        if level == self.depth - 1:
            return self.coarsest.solve(b)
        lv = self.levels[level]
        x = lv.smoother.forward(np.zeros_like(b), b, lv.pre_smooth)
        p = lv.prolongation.to_scipy()
        r = b - lv.smoother.operator @ x
        x = x + p @ self.vcycle(p.T @ r, level + 1)
        return lv.smoother.backward(x, b, lv.post_smooth)


def gmg_build(
    fine: CsrMatrix,
    grid: GridDescriptor,
    levels: int | None = None,
    omega: float = 1.0,
    nu_pre: int = 2,
    nu_post: int = 2,
) -> GmgHierarchy:
    """
    Build the Galerkin hierarchy for an SPD matrix on ``grid``.

    Args:
        fine: SPD matrix on the interior nodes of ``grid``
        grid: Fine grid
        levels: Number of grids including the finest (None: coarsen to 4x4 cells)
        omega: SOR relaxation in (0, 2); 1.0 is Gauss-Seidel
        nu_pre: Forward sweeps before the coarse correction
        nu_post: Backward sweeps after it

    Raises:
        MeshError: when the grid cannot be halved ``levels - 1`` times
        ConfigError: for a bad relaxation parameter or sweep count
    """
    if fine.shape != (grid.n_interior, grid.n_interior):
        raise MeshError(f"matrix {fine.shape} does not match a grid with {grid.n_interior} interior nodes")
    if not 0.0 < omega < 2.0:
        raise ConfigError(f"SOR omega must lie in (0, 2), got {omega}")
    if nu_pre < 0 or nu_post < 0 or nu_pre + nu_post == 0:
        raise ConfigError(f"need at least one smoothing sweep, got pre={nu_pre}, post={nu_post}")
    levels = default_levels(grid.m) if levels is None else levels
    if levels < 1:
        raise ConfigError(f"levels must be >= 1, got {levels}")
    if grid.m % (1 << (levels - 1)) or grid.m >> (levels - 1) < 2:
        raise MeshError(f"{grid.m} cells per side cannot be halved {levels - 1} times")

    built: list[GmgLevel] = []
    g, a = grid, fine.to_scipy()
    for _ in range(levels - 1):
        p = prolongation(g)
        built.append(
            GmgLevel(
                g, CsrMatrix.from_scipy(a), CsrMatrix.from_scipy(p), SorSmoother.build(a, omega), omega, nu_pre, nu_post
            )
        )
        coarse = p.T @ a @ p
        a = sp.csr_array(0.5 * (coarse + coarse.T))
        g = g.coarsened()
    coarse_matrix = CsrMatrix.from_scipy(a)
    built.append(GmgLevel(g, coarse_matrix, None, None, omega, 0, 0))
    factor = cholesky(coarse_matrix)
    logger.debug(
        f"GMG hierarchy: {levels} levels, sizes {[lv.operator.rows for lv in built]}, "
        f"omega={omega}, sweeps={nu_pre}/{nu_post}"
    )
    return GmgHierarchy(levels=built, coarsest=factor)


def gmg_vcycle_prec(h: GmgHierarchy) -> PreconditionerHandle:
    """One V-cycle per application; symmetric when pre and post sweep counts match."""
    symmetry = Symmetry.BY_CONSTRUCTION if h.symmetric else Symmetry.UNSYMMETRIC
    if not h.symmetric:
        logger.warning("unequal pre/post smoothing: V-cycle is not symmetric and cannot precondition CG")
    lv = h.levels[0]
    return PreconditionerHandle(
        lambda r: h.vcycle(np.asarray(r, dtype=float)),
        symmetry,
        f"GMG V-cycle ({h.depth} levels, SOR omega={lv.sor_omega}, {lv.pre_smooth}/{lv.post_smooth} sweeps)",
    )
