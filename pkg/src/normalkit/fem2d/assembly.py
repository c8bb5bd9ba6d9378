"""P1 assembly of the advection-diffusion operator and its preconditioners.

Every element matrix is built for all triangles at once as an array of shape
(nt, 3, 3) and scattered through ``scipy.sparse.coo_array``, which sums
duplicates. Unknowns are the interior nodes; homogeneous Dirichlet data is
eliminated unless a boundary function is passed.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from ..errors import ConfigError
from ..matkit import CsrMatrix, cholesky
from .mesh import StructuredMesh

logger = logging.getLogger(__name__)

SourceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Edge-midpoint rule: barycentric coordinates of the three points, equal weights |T|/3
_QUAD_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


class Wind(str, Enum):
    X = "x"
    DIAG = "diag"

    @property
    def vector(self) -> tuple[float, float]:
        if self is Wind.X:
            return (1.0, 0.0)
        s = 1.0 / np.sqrt(2.0)
        return (s, s)

    @property
    def tag(self) -> str:
        return "xflow" if self is Wind.X else "diagflow"


@dataclass(frozen=True)
class FemProblem2D:
    """-nu Laplace(u) + beta . grad(u) = f on the unit square, u = 0 on the boundary."""

    nu: float
    beta: tuple[float, float] = (1.0, 0.0)
    delta_sd: float = 1e-4
    f: SourceFn | None = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"nu must be > 0, got {self.nu}")
        if np.hypot(*self.beta) > 1.0 + 1e-12:
            raise ConfigError(f"|beta| must not exceed 1, got {np.hypot(*self.beta):.6g}")
        if self.delta_sd < 0:
            raise ConfigError(f"streamline-diffusion parameter must be >= 0, got {self.delta_sd}")

    @classmethod
    def with_wind(cls, nu: float, wind: Wind | str, delta_sd: float = 1e-4) -> "FemProblem2D":
        return cls(nu=nu, beta=Wind(wind).vector, delta_sd=delta_sd)

    def source(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.f is None:
            return np.ones_like(x)
        return np.asarray(self.f(x, y), dtype=float) * np.ones_like(x)


# =============================================================================
# Scatter
# =============================================================================


def _scatter(mesh: StructuredMesh, local: np.ndarray) -> sp.csr_array:
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return sp.coo_array((local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()


def _restrict(mesh: StructuredMesh, full: sp.csr_array, interior_only: bool) -> CsrMatrix:
    if not interior_only:
        return CsrMatrix.from_scipy(full)
    idx = mesh.interior
    return CsrMatrix.from_scipy(full[idx][:, idx])


def _wind_gradients(mesh: StructuredMesh, beta) -> np.ndarray:
    """beta . grad(phi_k) per triangle, shape (nt, 3)."""
    return mesh.gradients @ np.asarray(beta, dtype=float)


# =============================================================================
# Element matrices
# =============================================================================


def _local_stiffness(mesh: StructuredMesh) -> np.ndarray:
    g = mesh.gradients
    return mesh.areas[:, None, None] * np.einsum("tid,tjd->tij", g, g)


def _local_mass(mesh: StructuredMesh) -> np.ndarray:
    return mesh.areas[:, None, None] * _MASS_REF[None]


def _local_advection(mesh: StructuredMesh, beta) -> np.ndarray:
    # (beta . grad phi_j, phi_i): integral of phi_i is |T|/3
    bg = _wind_gradients(mesh, beta)
    return (mesh.areas / 3.0)[:, None, None] * np.broadcast_to(bg[:, None, :], (bg.shape[0], 3, 3))


def _local_streamline(mesh: StructuredMesh, beta) -> np.ndarray:
    bg = _wind_gradients(mesh, beta)
    return mesh.areas[:, None, None] * bg[:, :, None] * bg[:, None, :]


def assemble_stiffness(mesh: StructuredMesh, *, interior_only: bool = True) -> CsrMatrix:
    """K_ij = (grad phi_j, grad phi_i)."""
    return _restrict(mesh, _scatter(mesh, _local_stiffness(mesh)), interior_only)


def assemble_mass(mesh: StructuredMesh, *, interior_only: bool = True) -> CsrMatrix:
    """M_ij = (phi_j, phi_i)."""
    return _restrict(mesh, _scatter(mesh, _local_mass(mesh)), interior_only)


def assemble_advection(mesh: StructuredMesh, beta, *, interior_only: bool = True) -> CsrMatrix:
    """C_ij = (beta . grad phi_j, phi_i)."""
    return _restrict(mesh, _scatter(mesh, _local_advection(mesh, beta)), interior_only)


def assemble_anisotropic(mesh: StructuredMesh, beta, *, interior_only: bool = True) -> CsrMatrix:
    """((beta beta^T) grad phi_j, grad phi_i), the streamline-diffusion form without delta."""
    return _restrict(mesh, _scatter(mesh, _local_streamline(mesh, beta)), interior_only)


# =============================================================================
# System assembly
# =============================================================================


def _load(mesh: StructuredMesh, p: FemProblem2D) -> np.ndarray:
    """(f, phi_i + delta beta . grad phi_i) per triangle, shape (nt, 3)."""
    pts = np.einsum("qk,tkd->tqd", _QUAD_BARY, mesh.nodes[mesh.triangles])
    fq = p.source(pts[..., 0], pts[..., 1])  # (nt, 3)
    w = (mesh.areas / 3.0)[:, None]
    galerkin = (w * fq) @ _QUAD_BARY  # sum_q w f(x_q) phi_i(x_q)
    integral_f = (w * fq).sum(axis=1)
    sd = p.delta_sd * _wind_gradients(mesh, p.beta) * integral_f[:, None]
    return galerkin + sd


def assemble_advdiff(
    mesh: StructuredMesh,
    p: FemProblem2D,
    *,
    boundary: SourceFn | None = None,
) -> tuple[CsrMatrix, np.ndarray]:
    """
    A = nu K + C + delta S on the interior nodes and the matching right-hand side.

    Args:
        mesh: Triangulation
        p: Coefficients and source
        boundary: Dirichlet data g(x, y); eliminated into the right-hand side (zero when omitted)
    """
    local = p.nu * _local_stiffness(mesh) + _local_advection(mesh, p.beta)
    if p.delta_sd:
        local = local + p.delta_sd * _local_streamline(mesh, p.beta)
    full = _scatter(mesh, local)

    f_local = _load(mesh, p)
    rhs_full = np.bincount(mesh.triangles.ravel(), weights=f_local.ravel(), minlength=mesh.n_nodes)
    idx = mesh.interior
    rhs = rhs_full[idx]
    if boundary is not None:
        bnd = np.flatnonzero(mesh.boundary_mask)
        g = np.asarray(boundary(mesh.nodes[bnd, 0], mesh.nodes[bnd, 1]), dtype=float) * np.ones(bnd.size)
        rhs = rhs - full[idx][:, bnd] @ g

    a = CsrMatrix.from_scipy(full[idx][:, idx])
    logger.debug(
        f"advection-diffusion system: {mesh.mx}x{mesh.my} cells, {a.rows} unknowns, nnz={a.nnz}, "
        f"nu={p.nu:g}, beta={p.beta}, delta={p.delta_sd:g}"
    )
    return a, rhs


def assemble_reaction_diffusion(mesh: StructuredMesh, nu: float, beta) -> CsrMatrix:
    """nu K + nu^{-1} |beta|^2 M, the unprojected normal operator."""
    if not nu > 0:
        raise ConfigError(f"nu must be > 0, got {nu}")
    b2 = float(np.dot(beta, beta))
    return _restrict(mesh, _scatter(mesh, nu * _local_stiffness(mesh) + (b2 / nu) * _local_mass(mesh)), True)


def projected_rd_operator(mesh: StructuredMesh, nu: float, beta) -> LinearOperator:
    """
    nu K + nu^{-1} C K^{-1} C^T, applied matrix-free.

    The second term is ||Pi(beta u)||^2 where Pi projects onto discrete
    gradients: Pi(beta u) = grad(phi) with K phi = C^T u.
    """
    if not nu > 0:
        raise ConfigError(f"nu must be > 0, got {nu}")
    k = assemble_stiffness(mesh)
    c = assemble_advection(mesh, beta)
    kf = cholesky(k)

    def apply(u: np.ndarray) -> np.ndarray:
        u = np.ravel(u)
        return nu * k.matvec(u) + c.matvec(kf.solve(c.rmatvec(u))) / nu

    n = k.rows
    return LinearOperator((n, n), matvec=apply, rmatvec=apply, dtype=float)


def assemble_projected_rd_dense(mesh: StructuredMesh, nu: float, beta) -> np.ndarray:
    """Dense nu K + nu^{-1} C K^{-1} C^T, for direct factorization on small meshes."""
    if not nu > 0:
        raise ConfigError(f"nu must be > 0, got {nu}")
    k = assemble_stiffness(mesh)
    c = assemble_advection(mesh, beta)
    kinv_ct = cholesky(k).solve_many(c.to_scipy().T.toarray())
    g = nu * k.toarray() + (c.to_scipy() @ kinv_ct) / nu
    logger.debug(f"dense projected operator: n={k.rows}")
    return 0.5 * (g + g.T)


def export_solution_csv(mesh: StructuredMesh, u: np.ndarray, path: Path | str) -> Path:
    """Write ``x,y,u`` for every node, boundary nodes included (zeros)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([mesh.nodes, mesh.extend(u)])
    np.savetxt(path, data, delimiter=",", header="x,y,u", comments="", fmt="%.17g")
    return path
