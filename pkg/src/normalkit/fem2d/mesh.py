"""Structured triangulation of the unit square."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import MeshError
from ..precond.multigrid import GridDescriptor


@dataclass(frozen=True)
class StructuredMesh:
    """
    mx x my cells, each split along its south-west / north-east diagonal.

    Nodes are numbered x-fastest, node (i, j) = j (mx + 1) + i. Interior nodes
    carry the unknowns, numbered x-fastest as well.
    """

    mx: int
    my: int | None = None

    def __post_init__(self):
        if self.my is None:
            object.__setattr__(self, "my", self.mx)
        if self.mx < 2 or self.my < 2:
            raise MeshError(f"need at least 2x2 cells, got {self.mx}x{self.my}")

    @property
    def hx(self) -> float:
        return 1.0 / self.mx

    @property
    def hy(self) -> float:
        return 1.0 / self.my  # type: ignore[operator]

    @property
    def n_nodes(self) -> int:
        return (self.mx + 1) * (self.my + 1)  # type: ignore[operator]

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.mx + 1)
        y = np.linspace(0.0, 1.0, self.my + 1)  # type: ignore[operator]
        xx, yy = np.meshgrid(x, y, indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])

    @cached_property
    def triangles(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.mx), np.arange(self.my), indexing="xy")
        i, j = i.ravel(), j.ravel()
        w = self.mx + 1
        v00 = j * w + i
        v10 = v00 + 1
        v01 = v00 + w
        v11 = v01 + 1
        lower = np.column_stack([v00, v10, v11])
        upper = np.column_stack([v00, v11, v01])
        return np.vstack([lower, upper])

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        eps = 1e-12
        return (x < eps) | (x > 1 - eps) | (y < eps) | (y > 1 - eps)

    @cached_property
    def interior(self) -> np.ndarray:
        """Node numbers of the interior nodes, in unknown order."""
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def dof_map(self) -> np.ndarray:
        """Node number -> unknown number, -1 on the boundary."""
        m = np.full(self.n_nodes, -1, dtype=np.int64)
        m[self.interior] = np.arange(self.interior.size)
        return m

    @property
    def n_dofs(self) -> int:
        return int(self.interior.size)

    @property
    def grid(self) -> GridDescriptor:
        if self.mx != self.my:
            raise MeshError(f"multigrid needs square grids, got {self.mx}x{self.my}")
        return GridDescriptor(self.mx)

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def gradients(self) -> np.ndarray:
        """Constant gradients of the three hat functions per triangle, shape (nt, 3, 2)."""
        p = self.nodes[self.triangles]
        area2 = 2.0 * self.areas
        if np.any(area2 <= 0):
            raise MeshError("degenerate or clockwise triangle")
        x, y = p[:, :, 0], p[:, :, 1]
        # grad phi_k = (y_{k+1} - y_{k+2}, x_{k+2} - x_{k+1}) / 2|T|
        gx = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
        gy = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
        return np.stack([gx, gy], axis=2) / area2[:, None, None]

    def extend(self, u: np.ndarray, boundary_value: float = 0.0) -> np.ndarray:
        """Interior vector -> nodal vector with ``boundary_value`` on the boundary."""
        full = np.full(self.n_nodes, boundary_value, dtype=float)
        full[self.interior] = u
        return full
