"""P1 finite elements for 2D advection-diffusion on the unit square."""

from .assembly import (
    FemProblem2D,
    Wind,
    assemble_advdiff,
    assemble_advection,
    assemble_anisotropic,
    assemble_mass,
    assemble_projected_rd_dense,
    assemble_reaction_diffusion,
    assemble_stiffness,
    export_solution_csv,
    projected_rd_operator,
)
from .mesh import StructuredMesh
from .riesz import RieszMap, RieszVariant, riesz

__all__ = [
    # Mesh and problem
    "StructuredMesh",
    "FemProblem2D",
    "Wind",
    # Assembly
    "assemble_advdiff",
    "assemble_stiffness",
    "assemble_mass",
    "assemble_advection",
    "assemble_anisotropic",
    "assemble_reaction_diffusion",
    "projected_rd_operator",
    "assemble_projected_rd_dense",
    "export_solution_csv",
    # Riesz maps
    "RieszVariant",
    "RieszMap",
    "riesz",
]
